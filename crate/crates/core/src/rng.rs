//! Pinned random number generation.
//!
//! Every random draw in the crate comes from `ChaCha8Rng` (rand_chacha 0.3
//! stream) seeded through [`generator`]. Independent sub-streams, such as one
//! per Monte Carlo trial, are keyed by [`derive_seed`], a SplitMix64 mix of the
//! master seed and the stream index. Uniform floats take the top 53 bits of a
//! `u64`, so a fixed seed yields bit-identical results on every platform.

use rand_chacha::rand_core::{RngCore, SeedableRng};
use rand_chacha::ChaCha8Rng;

pub type Generator = ChaCha8Rng;

pub fn generator(seed: u64) -> Generator {
    ChaCha8Rng::seed_from_u64(seed)
}

fn splitmix64(mut z: u64) -> u64 {
    z = z.wrapping_add(0x9E37_79B9_7F4A_7C15);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

/// Seed of sub-stream `index` under `master`.
pub fn derive_seed(master: u64, index: u64) -> u64 {
    splitmix64(splitmix64(master) ^ index)
}

/// Uniform draw from `[0, 1)` with 53 bits of precision.
pub fn unit_f64(rng: &mut Generator) -> f64 {
    (rng.next_u64() >> 11) as f64 * (1.0 / (1u64 << 53) as f64)
}
