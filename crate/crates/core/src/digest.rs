//! SHA-256 digests over canonical JSON.
//!
//! Canonical here means: serde_json output of types whose maps are all
//! `BTreeMap`/`BTreeSet`, so key order is fixed.

use alloc::string::String;
use core::fmt::Write;

use serde::Serialize;
use sha2::{Digest as _, Sha256};

pub type Digest = [u8; 32];

pub fn canonical_json<T: Serialize + ?Sized>(value: &T) -> String {
    serde_json::to_string(value).expect("engine types always serialize")
}

pub fn sha256(bytes: &[u8]) -> Digest {
    Sha256::digest(bytes).into()
}

pub fn digest_of<T: Serialize + ?Sized>(value: &T) -> Digest {
    sha256(canonical_json(value).as_bytes())
}

/// Folds `next` into a running chain digest.
pub fn chain(prev: &Digest, next: &[u8]) -> Digest {
    let mut h = Sha256::new();
    h.update(prev);
    h.update(next);
    h.finalize().into()
}

pub fn to_hex(d: &Digest) -> String {
    let mut s = String::with_capacity(64);
    for b in d {
        let _ = write!(s, "{b:02x}");
    }
    s
}

pub fn hex_digest_of<T: Serialize + ?Sized>(value: &T) -> String {
    to_hex(&digest_of(value))
}
