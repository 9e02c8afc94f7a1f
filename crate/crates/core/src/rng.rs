//! Seeded random numbers with a stable bit-level contract.

use rand_chacha::rand_core::{RngCore, SeedableRng};
use rand_chacha::ChaCha8Rng;

pub(crate) fn seeded(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

/// Uniform draw from [0, 1) built from the top 53 bits of the stream, so
/// the value does not depend on distribution code elsewhere.
pub(crate) fn uniform01(rng: &mut ChaCha8Rng) -> f64 {
    (rng.next_u64() >> 11) as f64 * (1.0 / 9007199254740992.0)
}

/// Uniform draw from [-1, 1).
pub(crate) fn uniform_sym(rng: &mut ChaCha8Rng) -> f64 {
    2.0 * uniform01(rng) - 1.0
}
