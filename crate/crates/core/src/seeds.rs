//! Deterministic seed derivation.
//!
//! Every randomized operation in the crate owns a ChaCha stream whose seed is
//! derived from a user-facing seed plus fixed purpose tags, so independent
//! stages never share a stream and whole pipelines replay bit-for-bit.

use rand_chacha::rand_core::SeedableRng;
use rand_chacha::ChaCha8Rng;

pub const TAG_SPLIT: u64 = 0x01;
pub const TAG_LAYER_INIT: u64 = 0x02;
pub const TAG_OBSERVER: u64 = 0x03;
pub const TAG_SAMPLE_LEN: u64 = 0x04;
pub const TAG_SAMPLE_NOISE: u64 = 0x05;
pub const TAG_SAMPLE_BLINK: u64 = 0x06;
pub const TAG_CORRUPT_POSITIONS: u64 = 0x07;
pub const TAG_CORRUPT_SAMPLE: u64 = 0x08;
pub const TAG_GA_INIT: u64 = 0x09;
pub const TAG_GA_EVOLVE: u64 = 0x0a;
pub const TAG_GA_FITNESS_SPLIT: u64 = 0x0b;
pub const TAG_GA_FITNESS_TRAIN: u64 = 0x0c;
pub const TAG_RUN_GA: u64 = 0x0d;
pub const TAG_RUN_FINAL_INIT: u64 = 0x0e;
pub const TAG_KFOLD: u64 = 0x0f;

/// SplitMix64 finalizer.
fn splitmix(mut z: u64) -> u64 {
    z = z.wrapping_add(0x9e37_79b9_7f4a_7c15);
    z = (z ^ (z >> 30)).wrapping_mul(0xbf58_476d_1ce4_e5b9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94d0_49bb_1331_11eb);
    z ^ (z >> 31)
}

/// Folds `tags` into `base`, producing an independent derived seed.
pub fn mix(base: u64, tags: &[u64]) -> u64 {
    let mut state = splitmix(base);
    for &tag in tags {
        state = splitmix(state ^ splitmix(tag));
    }
    state
}

/// The crate-wide RNG, seeded explicitly.
pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}
