//! Counter-based seed derivation.
//!
//! Every random stream is keyed by a tuple of integers, so that work items
//! can be generated in any order or in parallel and still reproduce.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

/// SplitMix64 finaliser.
#[inline]
pub fn mix64(mut z: u64) -> u64 {
    z = z.wrapping_add(0x9E37_79B9_7F4A_7C15);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

/// Folds a key path into one 64-bit seed.
pub fn derive(master: u64, path: &[u64]) -> u64 {
    path.iter().fold(mix64(master), |acc, &k| mix64(acc ^ mix64(k)))
}

/// Stream for the given key path.
pub fn stream(master: u64, path: &[u64]) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(derive(master, path))
}

/// Domain tags separating stream families under one master seed.
pub mod tag {
    pub const CODEBOOK: u64 = 0xC0DE;
    pub const TRIAL: u64 = 0x7171;
    pub const MESSAGE: u64 = 0x3E55;
    pub const NOISE: u64 = 0x0153;
    pub const ADVERSARY: u64 = 0xAD7E;
    pub const MICRO: u64 = 0x31C0;
}
