//! Seeded randomness.
//!
//! Two sources: [`SessionRng`], a ChaCha stream owned by a session whose
//! position is part of the state digest, and [`mix`], a stateless hash used
//! wherever a value must be a pure function of its inputs (mock decisions,
//! embeddings, questionnaire jitter).

use alloc::string::String;

use rand::{Rng, RngCore, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::digest;

/// splitmix64 finalizer.
pub fn splitmix(mut z: u64) -> u64 {
    z = z.wrapping_add(0x9E37_79B9_7F4A_7C15);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

/// FNV-1a over bytes, then splitmix with the seed.
pub fn mix(seed: u64, bytes: &[u8]) -> u64 {
    let mut h: u64 = 0xcbf2_9ce4_8422_2325;
    for b in bytes {
        h ^= u64::from(*b);
        h = h.wrapping_mul(0x0000_0100_0000_01B3);
    }
    splitmix(h ^ splitmix(seed))
}

/// Maps a hash to `[0, 1)`.
pub fn unit(h: u64) -> f64 {
    (h >> 11) as f64 / (1u64 << 53) as f64
}

/// Session-owned generator that counts its draws.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct SessionRng {
    seed: u64,
    draws: u64,
    #[serde(skip, default = "placeholder_rng")]
    inner: Option<ChaCha8Rng>,
}

fn placeholder_rng() -> Option<ChaCha8Rng> {
    None
}

impl SessionRng {
    pub fn new(seed: u64) -> Self {
        Self { seed, draws: 0, inner: Some(ChaCha8Rng::seed_from_u64(seed)) }
    }

    pub fn seed(&self) -> u64 {
        self.seed
    }

    fn rng(&mut self) -> &mut ChaCha8Rng {
        if self.inner.is_none() {
            // Restored from a snapshot: fast-forward to the recorded position.
            let mut r = ChaCha8Rng::seed_from_u64(self.seed);
            r.set_word_pos(u128::from(self.draws) * 2);
            self.inner = Some(r);
        }
        self.inner.as_mut().expect("initialized above")
    }

    pub fn next_u64(&mut self) -> u64 {
        let v = self.rng().next_u64();
        self.draws += 1;
        v
    }

    /// Uniform index in `0..n`; `n` must be non-zero.
    pub fn below(&mut self, n: usize) -> usize {
        (self.next_u64() % n as u64) as usize
    }

    pub fn unit(&mut self) -> f64 {
        unit(self.next_u64())
    }

    pub fn state_digest(&self) -> String {
        let mut buf = [0u8; 16];
        buf[..8].copy_from_slice(&self.seed.to_le_bytes());
        buf[8..].copy_from_slice(&self.draws.to_le_bytes());
        digest::to_hex(&digest::sha256(&buf))
    }
}

/// Fisher-Yates shuffle driven by a ChaCha stream seeded from `seed`.
pub fn shuffle<T>(items: &mut [T], seed: u64) {
    let mut r = ChaCha8Rng::seed_from_u64(seed);
    for i in (1..items.len()).rev() {
        let j = r.random_range(0..=i);
        items.swap(i, j);
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn restored_rng_continues_the_stream() {
        let mut a = SessionRng::new(9);
        a.next_u64();
        a.next_u64();
        let json = serde_json::to_string(&a).unwrap();
        let mut b: SessionRng = serde_json::from_str(&json).unwrap();
        assert_eq!(a.next_u64(), b.next_u64());
        assert_eq!(a.state_digest(), b.state_digest());
    }

    #[test]
    fn mix_is_pure() {
        assert_eq!(mix(1, b"x"), mix(1, b"x"));
        assert_ne!(mix(1, b"x"), mix(2, b"x"));
    }
}
