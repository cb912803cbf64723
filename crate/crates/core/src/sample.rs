//! Seeded rational sample points.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::rational::Rational;

/// Largest absolute numerator drawn.
pub const NUMERATOR_BOUND: i64 = 1 << 16;
/// Denominators are drawn uniformly from this set.
pub const DENOMINATORS: [i64; 4] = [1, 2, 4, 8];

/// Reproducible stream of rational vectors with numerators uniform in
/// `[−2¹⁶, 2¹⁶]` and denominators in `{1, 2, 4, 8}`.
pub struct RationalSampler {
    rng: ChaCha8Rng,
}

impl RationalSampler {
    pub fn new(seed: u64) -> Self {
        RationalSampler {
            rng: ChaCha8Rng::seed_from_u64(seed),
        }
    }

    pub fn scalar(&mut self) -> Rational {
        let num = self.rng.random_range(-NUMERATOR_BOUND..=NUMERATOR_BOUND);
        let den = DENOMINATORS[self.rng.random_range(0..DENOMINATORS.len())];
        Rational::new(num, den)
    }

    pub fn vector(&mut self, dim: usize) -> Vec<Rational> {
        (0..dim).map(|_| self.scalar()).collect()
    }

    /// Uniform integer in `[lo, hi]`, for callers needing small directions.
    pub fn int_in(&mut self, lo: i64, hi: i64) -> i64 {
        self.rng.random_range(lo..=hi)
    }

    /// A vector with a fraction of coordinates forced equal to others, so
    /// that ties (where maxima switch pieces) are exercised too.
    pub fn vector_with_ties(&mut self, dim: usize) -> Vec<Rational> {
        let mut v = self.vector(dim);
        if dim > 1 && self.rng.random_bool(0.25) {
            let i = self.rng.random_range(0..dim);
            let j = self.rng.random_range(0..dim);
            v[i] = v[j].clone();
        }
        v
    }
}
