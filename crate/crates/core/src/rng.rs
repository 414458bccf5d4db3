//! Seeding rules shared by the sampler, the engine and the experiment runner.
//!
//! Every trial owns exactly one [`TrialRng`] stream. Streams are derived from
//! a base seed with [`split`], so batches can be executed in any order (or in
//! parallel) and still reproduce bit-for-bit.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

pub type TrialRng = ChaCha8Rng;

/// SplitMix64 finaliser.
pub fn mix(x: u64) -> u64 {
    let mut z = x.wrapping_add(0x9e37_79b9_7f4a_7c15);
    z = (z ^ (z >> 30)).wrapping_mul(0xbf58_476d_1ce4_e5b9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94d0_49bb_1331_11eb);
    z ^ (z >> 31)
}

/// Seed of the `i`-th child stream: `base ^ mix(i)`.
pub fn split(base: u64, i: u64) -> u64 {
    base ^ mix(i)
}

/// Stream for restart attempt `attempt` of the trial seeded with `seed`.
/// Attempt 0 uses the trial seed unchanged.
pub fn attempt_rng(seed: u64, attempt: u32) -> TrialRng {
    let s = if attempt == 0 {
        seed
    } else {
        mix(seed ^ mix(0x5eed_0000 + attempt as u64))
    };
    TrialRng::seed_from_u64(s)
}

pub fn rng_from_seed(seed: u64) -> TrialRng {
    TrialRng::seed_from_u64(seed)
}
