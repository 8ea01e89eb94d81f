//! Stable derivation of random streams from a single master seed.
//!
//! Every random quantity in a run is keyed by `(master_seed, purpose, index...)`
//! so results do not depend on execution order or on the number of workers.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

const GOLDEN: u64 = 0x9E37_79B9_7F4A_7C15;

/// SplitMix64 finalizer.
#[inline]
pub fn mix64(mut z: u64) -> u64 {
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

/// FNV-1a over the purpose label, so labels map to fixed 64-bit tags.
pub const fn purpose_tag(purpose: &str) -> u64 {
    let bytes = purpose.as_bytes();
    let mut h: u64 = 0xcbf2_9ce4_8422_2325;
    let mut i = 0;
    while i < bytes.len() {
        h ^= bytes[i] as u64;
        h = h.wrapping_mul(0x0000_0100_0000_01B3);
        i += 1;
    }
    h
}

/// Hash a seed together with a sequence of words.
#[inline]
pub fn hash_words(seed: u64, words: &[u64]) -> u64 {
    let mut h = mix64(seed ^ GOLDEN);
    for &w in words {
        h = mix64(h.wrapping_add(GOLDEN) ^ w);
    }
    h
}

/// Map a hash to a uniform value in `[0, 1)` using the top 53 bits.
#[inline]
pub fn unit_f64(h: u64) -> f64 {
    (h >> 11) as f64 * (1.0 / (1u64 << 53) as f64)
}

/// Seed for the stream identified by `(master, purpose, index)`.
pub fn derive_seed(master: u64, purpose: &str, index: u64) -> u64 {
    hash_words(master, &[purpose_tag(purpose), index])
}

/// A ChaCha8 generator for the stream identified by `(master, purpose, index)`.
pub fn stream_rng(master: u64, purpose: &str, index: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(derive_seed(master, purpose, index))
}
