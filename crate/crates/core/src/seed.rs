//! Stream seeding for reproducible parallel Monte Carlo.
//!
//! Every independent unit of work (a sampler draw, a search run, a grid
//! point) gets its own generator seeded from `(master_seed, index)` through
//! the SplitMix64 output function, so results never depend on which thread
//! ran which unit.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

pub type StreamRng = ChaCha8Rng;

const GOLDEN_GAMMA: u64 = 0x9e37_79b9_7f4a_7c15;

/// SplitMix64 finalizer.
pub fn splitmix64(mut z: u64) -> u64 {
    z = (z ^ (z >> 30)).wrapping_mul(0xbf58_476d_1ce4_e5b9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94d0_49bb_1331_11eb);
    z ^ (z >> 31)
}

/// Seed of stream `index` under `master_seed`: the `(index + 1)`-th output of
/// a SplitMix64 generator started at `master_seed`.
pub fn mix(master_seed: u64, index: u64) -> u64 {
    splitmix64(master_seed.wrapping_add(GOLDEN_GAMMA.wrapping_mul(index.wrapping_add(1))))
}

pub fn stream_rng(master_seed: u64, index: u64) -> StreamRng {
    StreamRng::seed_from_u64(mix(master_seed, index))
}
