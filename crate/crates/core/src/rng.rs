//! Seeded random number generation.
//!
//! Every source of randomness is an explicit [`RunRng`] (counter-based
//! ChaCha8) derived from a 64-bit seed, so any draw sequence can be replayed
//! bit-exactly. Shared-seed oracles derive a fresh generator from a 64-bit
//! scenario seed per query, which lets the same scenario be evaluated at
//! several points.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;

use crate::vector::DenseVector;

/// The generator used everywhere in the library.
pub type RunRng = ChaCha8Rng;

/// Builds the generator for a given 64-bit seed.
pub fn rng_for_seed(seed: u64) -> RunRng {
    ChaCha8Rng::seed_from_u64(seed)
}

/// Builds the generator for a scenario seed (same construction as
/// [`rng_for_seed`]; a separate name marks intent at call sites).
pub fn rng_for_scenario(scenario: u64) -> RunRng {
    ChaCha8Rng::seed_from_u64(scenario)
}

/// Draws a fresh 64-bit scenario seed from a run generator.
pub fn next_scenario(rng: &mut RunRng) -> u64 {
    rng.random::<u64>()
}

/// A standard normal vector of the given dimension.
pub fn standard_normal_vector(dim: usize, rng: &mut RunRng) -> DenseVector {
    DenseVector::from_raw((0..dim).map(|_| rng.sample(StandardNormal)).collect())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn replay_is_bit_identical() {
        let a: Vec<u64> = {
            let mut r = rng_for_seed(42);
            (0..8).map(|_| next_scenario(&mut r)).collect()
        };
        let b: Vec<u64> = {
            let mut r = rng_for_seed(42);
            (0..8).map(|_| next_scenario(&mut r)).collect()
        };
        assert_eq!(a, b);
    }

    #[test]
    fn distinct_seeds_diverge() {
        let mut a = rng_for_seed(1);
        let mut b = rng_for_seed(2);
        assert_ne!(next_scenario(&mut a), next_scenario(&mut b));
    }
}
