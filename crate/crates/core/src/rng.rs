//! Seeded randomness.
//!
//! Every random choice in the crate is drawn from ChaCha8 seeded with a
//! single `u64` through `SeedableRng::seed_from_u64`, so a seed fully
//! determines generated metrics, instances and campaign rows.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

pub type TestbedRng = ChaCha8Rng;

pub fn seeded_rng(seed: u64) -> TestbedRng {
    ChaCha8Rng::seed_from_u64(seed)
}
