//! Deterministic seed derivation. One user seed fans out into independent
//! named streams so that, say, the data draw can be varied without
//! disturbing weight initialization.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

pub fn splitmix64(mut x: u64) -> u64 {
    x = x.wrapping_add(0x9E37_79B9_7F4A_7C15);
    x = (x ^ (x >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    x = (x ^ (x >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    x ^ (x >> 31)
}

fn fnv1a(bytes: &[u8]) -> u64 {
    bytes.iter().fold(0xcbf2_9ce4_8422_2325, |h, &b| (h ^ b as u64).wrapping_mul(0x0100_0000_01b3))
}

/// Seed of the stream called `name`.
pub fn derive(seed: u64, name: &str) -> u64 {
    splitmix64(seed ^ fnv1a(name.as_bytes()))
}

/// Seed of the `index`-th child of `seed`.
pub fn derive_index(seed: u64, index: u64) -> u64 {
    splitmix64(splitmix64(seed) ^ index)
}

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}
