//! Seeding recipe shared by every simulation in the crate.
//!
//! All randomness comes from `ChaCha8Rng` (crate `rand_chacha` 0.9), seeded
//! through `SeedableRng::seed_from_u64`. Normal variates are drawn with
//! `rand_distr::StandardNormal` (ziggurat). Composite seeds are built by
//! folding each key component through the SplitMix64 finalizer:
//!
//! ```text
//! h0 = splitmix64(base)
//! h_{i+1} = splitmix64(h_i ^ key_i)
//! ```
//!
//! so a replication seed depends only on `(base_seed, n, p_index, rep)` and
//! never on how work is scheduled across threads. The recipe is part of the
//! reproducibility contract and must not change.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

pub type SimRng = ChaCha8Rng;

/// SplitMix64 finalizer (Steele, Lea & Flood).
pub fn splitmix64(mut z: u64) -> u64 {
    z = z.wrapping_add(0x9E37_79B9_7F4A_7C15);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

/// Fold a base seed with an ordered list of keys.
pub fn mix_seed(base: u64, keys: &[u64]) -> u64 {
    keys.iter()
        .fold(splitmix64(base), |h, &k| splitmix64(h ^ k))
}

/// Seed for one Monte Carlo replication.
pub fn replication_seed(base_seed: u64, n: usize, p_index: usize, rep: usize) -> u64 {
    mix_seed(base_seed, &[n as u64, p_index as u64, rep as u64])
}

pub fn rng_from_seed(seed: u64) -> SimRng {
    ChaCha8Rng::seed_from_u64(seed)
}
