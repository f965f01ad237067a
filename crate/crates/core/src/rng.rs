//! Keyed random streams.
//!
//! Every random draw in a run comes from a ChaCha stream keyed by
//! `(seed, purpose, step, index)`, so no stream carries state across steps.
//! A run can therefore be resumed from a snapshot without saving generator
//! state, and changing one consumer (say, the gate) never shifts the draws
//! seen by another.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

/// Stream purposes. The discriminants are part of the reproducibility
/// contract; do not renumber.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
#[repr(u64)]
pub enum Purpose {
    SeedPool = 1,
    Propose = 2,
    Gate = 3,
    Estimate = 4,
    PoolSample = 5,
    Rollout = 6,
    Holdout = 7,
    HoldoutAnswers = 8,
}

fn splitmix(mut z: u64) -> u64 {
    z = z.wrapping_add(0x9E37_79B9_7F4A_7C15);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

pub fn stream(seed: u64, purpose: Purpose, step: u64, index: u64) -> ChaCha8Rng {
    let mut h = splitmix(seed);
    for word in [purpose as u64, step, index] {
        h = splitmix(h ^ word);
    }
    ChaCha8Rng::seed_from_u64(h)
}
