//! Random streams and seed derivation.
//!
//! Every simulation run owns one ChaCha8 stream seeded from a `u64`. Sweep
//! cells derive their seeds with a SplitMix64-style mixer, which is a
//! bijection on `u64`; for a fixed root seed, distinct `(cell, replication)`
//! pairs therefore always map to distinct seeds.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

/// Generator used by every simulation run.
pub type SimRng = ChaCha8Rng;

pub fn sim_rng(seed: u64) -> SimRng {
    ChaCha8Rng::seed_from_u64(seed)
}

/// SplitMix64 finalizer.
pub fn mix64(mut z: u64) -> u64 {
    z = z.wrapping_add(0x9E37_79B9_7F4A_7C15);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

/// Seed for one replication of one sweep cell.
pub fn derive_seed(seed_base: u64, cell: u32, replication: u32) -> u64 {
    let slot = (u64::from(cell) << 32) | u64::from(replication);
    mix64(seed_base.wrapping_add(mix64(slot)))
}
