//! Seed handling. Every random decision in the pipeline draws from a
//! ChaCha stream derived from an explicit seed, so results do not depend
//! on thread scheduling or platform.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

pub type PipelineRng = ChaCha8Rng;

pub fn rng_from_seed(seed: u64) -> PipelineRng {
    ChaCha8Rng::seed_from_u64(seed)
}

/// Mixes a master seed with a stream index (splitmix64 finalizer).
///
/// Used to give each experiment cell, submodule run or tree its own
/// independent stream.
pub fn derive_seed(master: u64, stream: u64) -> u64 {
    let mut z = master
        .wrapping_add(stream.wrapping_mul(0x9E37_79B9_7F4A_7C15))
        .wrapping_add(0x9E37_79B9_7F4A_7C15);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}
