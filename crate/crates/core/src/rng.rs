//! Seeded randomness.
//!
//! Every stochastic routine in this crate draws from [`ChaCha8Rng`] seeded
//! through [`rng_from_seed`]. ChaCha8 output is value-stable across
//! `rand_chacha` releases, so a `(parameters, seed)` pair pins a run bit for
//! bit. Sub-streams (per instance, per loop iteration, per retry) are derived
//! with [`derive_seed`], a SplitMix64 fold over the master seed and a list of
//! stream labels.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

pub type SimRng = ChaCha8Rng;

pub fn rng_from_seed(seed: u64) -> SimRng {
    ChaCha8Rng::seed_from_u64(seed)
}

/// One step of the SplitMix64 output function.
pub fn splitmix64(mut z: u64) -> u64 {
    z = z.wrapping_add(0x9E37_79B9_7F4A_7C15);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

/// Derives an independent child seed: `h = splitmix64(master)`, then for each
/// label `h = splitmix64(h ^ label)`.
pub fn derive_seed(master: u64, labels: &[u64]) -> u64 {
    labels
        .iter()
        .fold(splitmix64(master), |h, &label| splitmix64(h ^ label))
}
