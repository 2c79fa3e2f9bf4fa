//! Seeded random streams.
//!
//! Every random draw in the crate comes from a ChaCha8 generator keyed by a
//! master seed and a stream tag, so results never depend on thread scheduling
//! or on how many draws another component made.

use rand_chacha::ChaCha8Rng;
use rand_core::{RngCore, SeedableRng};

/// The generator type returned by [`stream`].
pub type Stream = ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};

/// Stream tag for dictionary initialisation.
pub const STREAM_DICTIONARY: u64 = 1;
/// Stream tag for additive noise in synthetic trials.
pub const STREAM_NOISE: u64 = 2;

/// Generator for `(seed, tag)`: seeded from `seed`, stream id `tag`.
pub fn stream(seed: u64, tag: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(tag);
    rng
}

/// Uniform draw in `[0, 1)` with 53 bits of resolution.
pub fn uniform(rng: &mut impl RngCore) -> f64 {
    (rng.next_u64() >> 11) as f64 * (1.0 / (1u64 << 53) as f64)
}

pub fn standard_normal(rng: &mut impl RngCore) -> f64 {
    StandardNormal.sample(rng)
}
