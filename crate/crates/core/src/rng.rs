//! Keyed random streams.
//!
//! Every random decision in the toolkit draws from a PCG stream whose state is
//! derived from `(seed, purpose, key)`, where `key` is usually a sample id.
//! Results therefore depend only on the seed and on the identity of the item
//! being processed, never on iteration order or thread scheduling.

use rand_pcg::Pcg64Mcg;
use sha2::{Digest, Sha256};

pub type StreamRng = Pcg64Mcg;

/// Stable 64-bit hash of a `(purpose, key)` pair.
pub fn stable_hash(purpose: &str, key: &str) -> u64 {
    let mut h = Sha256::new();
    h.update(purpose.as_bytes());
    h.update([0u8]);
    h.update(key.as_bytes());
    let digest = h.finalize();
    u64::from_le_bytes(digest[..8].try_into().expect("sha256 yields 32 bytes"))
}

/// PCG stream seeded by `seed ^ stable_hash(purpose, key)`.
pub fn keyed_rng(seed: u64, purpose: &str, key: &str) -> StreamRng {
    let k = seed ^ stable_hash(purpose, key);
    // Pcg64Mcg takes a 128-bit state; spread the key over both halves.
    let state = ((k as u128) << 64) | (k.rotate_left(29) ^ 0x9E37_79B9_7F4A_7C15) as u128;
    Pcg64Mcg::new(state | 1)
}

/// Deterministic sort key for `key` under `(seed, purpose)`.
pub fn keyed_rank(seed: u64, purpose: &str, key: &str) -> u64 {
    use rand::RngCore;
    keyed_rng(seed, purpose, key).next_u64()
}
