//! Sentence embeddings.

use alloc::vec;
use alloc::vec::Vec;

use crate::rng;
use crate::text;

pub const DEFAULT_EMBED_DIM: usize = 64;

pub trait Embedder {
    fn embed(&self, text: &str) -> Vec<f64>;
}

/// Seeded random projection of token counts.
///
/// Each distinct token owns a fixed pseudo-random direction derived from
/// `(seed, token)`; a text embeds to the count-weighted sum of its token
/// directions. No network, no state.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct HashingEmbedder {
    pub dim: usize,
    pub seed: u64,
}

impl HashingEmbedder {
    pub fn new(dim: usize, seed: u64) -> Self {
        Self { dim: dim.max(1), seed }
    }
}

impl Embedder for HashingEmbedder {
    fn embed(&self, text: &str) -> Vec<f64> {
        let mut out = vec![0.0; self.dim];
        for tok in text::lexicon_tokens(text) {
            let mut h = rng::mix(self.seed, tok.as_bytes());
            for slot in out.iter_mut() {
                h = rng::splitmix(h);
                *slot += rng::unit(h) * 2.0 - 1.0;
            }
        }
        out
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::agent::memory::cosine;

    #[test]
    fn deterministic_and_order_free() {
        let e = HashingEmbedder::new(32, 7);
        assert_eq!(e.embed("quiet lake bench"), e.embed("quiet lake bench"));
        let a = e.embed("quiet lake bench");
        let b = e.embed("bench lake quiet");
        assert!((cosine(&a, &b) - 1.0).abs() < 1e-12);
        assert!(cosine(&a, &e.embed("noisy market")) < 0.9);
    }
}
