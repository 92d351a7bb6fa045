//! Deterministic derivation of random streams.
//!
//! Every randomized operation in this crate draws from a ChaCha stream whose
//! seed is derived from the caller's seed plus a context value (an example
//! index, a stage label, a fold number). Derived streams are independent of
//! each other and of evaluation order, so per-example work can be
//! parallelized or reordered without changing results.

use rand_chacha::rand_core::SeedableRng;
use rand_chacha::ChaCha12Rng;

/// splitmix64 finalizer; full-period, well-mixed, stable across platforms.
fn splitmix64(mut x: u64) -> u64 {
    x = x.wrapping_add(0x9e37_79b9_7f4a_7c15);
    let mut z = x;
    z = (z ^ (z >> 30)).wrapping_mul(0xbf58_476d_1ce4_e5b9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94d0_49bb_1331_11eb);
    z ^ (z >> 31)
}

/// Combines a seed with a context value into a new 64-bit seed.
pub fn mix(seed: u64, context: u64) -> u64 {
    splitmix64(splitmix64(seed) ^ context.wrapping_mul(0x9e37_79b9_7f4a_7c15))
}

/// Stable 64-bit hash of a label, for deriving seeds from names.
pub fn hash_label(label: &str) -> u64 {
    // FNV-1a.
    let mut h: u64 = 0xcbf2_9ce4_8422_2325;
    for b in label.as_bytes() {
        h ^= u64::from(*b);
        h = h.wrapping_mul(0x0000_0100_0000_01b3);
    }
    h
}

/// A fresh RNG for the given seed.
pub fn rng(seed: u64) -> ChaCha12Rng {
    ChaCha12Rng::seed_from_u64(seed)
}

/// A fresh RNG for a (seed, index) substream, e.g. one per example.
pub fn substream(seed: u64, index: u64) -> ChaCha12Rng {
    ChaCha12Rng::seed_from_u64(mix(seed, index))
}

/// A fresh RNG keyed by a string label, e.g. one per language pair or stage.
pub fn labeled_stream(seed: u64, label: &str) -> ChaCha12Rng {
    ChaCha12Rng::seed_from_u64(mix(seed, hash_label(label)))
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::Rng;

    #[test]
    fn substreams_are_reproducible() {
        let a: Vec<u64> = (0..8).map(|_| substream(7, 3).gen()).collect();
        let b: Vec<u64> = (0..8).map(|_| substream(7, 3).gen()).collect();
        assert_eq!(a, b);
    }

    #[test]
    fn substreams_differ_across_indices() {
        let a: u64 = substream(7, 0).gen();
        let b: u64 = substream(7, 1).gen();
        assert_ne!(a, b);
    }

    #[test]
    fn label_hash_is_stable() {
        // Standard FNV-1a test vectors, frozen so seeds derived from labels
        // never drift between builds.
        assert_eq!(hash_label(""), 0xcbf2_9ce4_8422_2325);
        assert_eq!(hash_label("a"), 0xaf63_dc4c_8601_ec8c);
    }
}
