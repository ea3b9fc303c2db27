//! Seeding helpers.
//!
//! Every random draw in the crate comes from a ChaCha8 generator keyed by a
//! 64-bit seed and a stream id. Distinct streams of the same seed are
//! independent, so one trial seed can feed the matrix, the target and each
//! measurement's noise without the draws interfering with each other.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

/// Stream ids used when one trial seed drives several generators.
pub mod stream {
    pub const MATRIX: u64 = 0;
    pub const AMPLITUDES: u64 = 1;
    pub const SUPPORT: u64 = 2;
    pub const SUPPORT_SAMPLER: u64 = 3;
    /// Noise for measurement `k` uses `NOISE_BASE + k`.
    pub const NOISE_BASE: u64 = 1 << 32;
}

pub fn rng(seed: u64, stream: u64) -> ChaCha8Rng {
    let mut r = ChaCha8Rng::seed_from_u64(seed);
    r.set_stream(stream);
    r
}

/// SplitMix64 finalizer over `master` and `index`; used to derive per-trial
/// seeds that do not depend on evaluation order.
pub fn derive_seed(master: u64, index: u64) -> u64 {
    let mut z = master
        .wrapping_add(0x9E37_79B9_7F4A_7C15)
        .wrapping_add(index.wrapping_mul(0xD1B5_4A32_D192_ED03));
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}
