//! Additive Gaussian noise wrappers.
//!
//! Lets deterministic problems exercise the stochastic code paths. The
//! operator wrapper derives the noise from the scenario seed alone, so for
//! point-independent scale the shared-seed difference F~(u,xi) - F~(v,xi)
//! is exactly F(u) - F(v) and the declared Lipschitz constant carries over.

use crate::error::Result;
use crate::oracle::{BGConstants, GradientOracle, OperatorOracle};
use crate::rng::{rng_for_scenario, standard_normal_vector, RunRng};
use crate::vector::DenseVector;

/// Noise magnitude as a function of the query point.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum NoiseScale {
    /// sigma, independent of the point.
    Constant(f64),
    /// b_w * ||x - anchor||, growing with distance from the oracle anchor.
    AnchorProportional(f64),
}

impl NoiseScale {
    fn at(&self, point: &DenseVector, anchor: &DenseVector) -> f64 {
        match self {
            NoiseScale::Constant(s) => *s,
            NoiseScale::AnchorProportional(b) => b * point.dist(anchor),
        }
    }

    /// Updates (B^2, G^2) for the extra isotropic second moment
    /// `scale(x)^2 * dim` added on top of the base draw.
    fn bump_bg(&self, base: &BGConstants, dim: usize) -> BGConstants {
        let d = dim as f64;
        let (b2, g2) = match self {
            NoiseScale::Constant(s) => (
                base.b * base.b,
                base.g * base.g + s * s * d,
            ),
            NoiseScale::AnchorProportional(bw) => (
                base.b * base.b + bw * bw * d,
                base.g * base.g,
            ),
        };
        BGConstants {
            b: b2.sqrt(),
            g: g2.sqrt(),
            anchor: base.anchor.clone(),
        }
    }
}

pub struct NoisyGradientOracle<O> {
    base: O,
    scale: NoiseScale,
    bg: BGConstants,
}

pub fn make_additive_noise_wrapper_gradient<O: GradientOracle>(
    base: O,
    scale: NoiseScale,
) -> NoisyGradientOracle<O> {
    let bg = scale.bump_bg(base.bg(), base.dimension());
    NoisyGradientOracle { base, scale, bg }
}

impl<O: GradientOracle> GradientOracle for NoisyGradientOracle<O> {
    fn dimension(&self) -> usize {
        self.base.dimension()
    }

    fn sample(&self, point: &DenseVector, rng: &mut RunRng) -> Result<DenseVector> {
        let draw = self.base.sample(point, rng)?;
        let s = self.scale.at(point, &self.bg.anchor);
        if s == 0.0 {
            return Ok(draw);
        }
        let noise = standard_normal_vector(self.dimension(), rng);
        Ok(draw.axpy(s, &noise))
    }

    fn mean_gradient(&self, point: &DenseVector) -> Option<DenseVector> {
        self.base.mean_gradient(point)
    }

    fn bg(&self) -> &BGConstants {
        &self.bg
    }
}

pub struct NoisyOperatorOracle<O> {
    base: O,
    scale: NoiseScale,
    bg: BGConstants,
    lipschitz: f64,
}

pub fn make_additive_noise_wrapper_operator<O: OperatorOracle>(
    base: O,
    scale: NoiseScale,
) -> NoisyOperatorOracle<O> {
    let bg = scale.bump_bg(base.bg(), base.dimension());
    let lipschitz = base.lipschitz();
    NoisyOperatorOracle {
        base,
        scale,
        bg,
        lipschitz,
    }
}

impl<O: OperatorOracle> OperatorOracle for NoisyOperatorOracle<O> {
    fn dimension(&self) -> usize {
        self.base.dimension()
    }

    fn sample_at(&self, point: &DenseVector, scenario: u64) -> Result<DenseVector> {
        let draw = self.base.sample_at(point, scenario)?;
        let s = self.scale.at(point, &self.bg.anchor);
        if s == 0.0 {
            return Ok(draw);
        }
        // Noise direction depends only on the scenario: a distinct stream
        // from the base oracle's, so wrapping does not perturb base draws.
        let mut noise_rng = rng_for_scenario(scenario ^ 0x9e37_79b9_7f4a_7c15);
        let noise = standard_normal_vector(self.dimension(), &mut noise_rng);
        Ok(draw.axpy(s, &noise))
    }

    fn mean_operator(&self, point: &DenseVector) -> Option<DenseVector> {
        self.base.mean_operator(point)
    }

    fn bg(&self) -> &BGConstants {
        &self.bg
    }

    fn lipschitz(&self) -> f64 {
        self.lipschitz
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::oracles::example1::{make_example1_oracle, PsdCheck};
    use crate::rng::rng_for_seed;

    fn base() -> impl GradientOracle {
        make_example1_oracle(
            &[vec![0.0, 0.0], vec![0.0, 0.0]],
            DenseVector::from(&[3.0, 4.0][..]),
            DenseVector::zeros(2),
            PsdCheck::Eigenvalue,
        )
        .unwrap()
    }

    #[test]
    fn zero_scale_is_transparent() {
        let w = make_additive_noise_wrapper_gradient(base(), NoiseScale::Constant(0.0));
        let mut rng = rng_for_seed(9);
        let d = w.sample(&DenseVector::zeros(2), &mut rng).unwrap();
        assert_eq!(d.as_slice(), &[3.0, 4.0]);
    }

    #[test]
    fn empirical_variance_matches_scale() {
        let sigma = 0.8;
        let w = make_additive_noise_wrapper_gradient(base(), NoiseScale::Constant(sigma));
        let mut rng = rng_for_seed(10);
        let x = DenseVector::zeros(2);
        let n = 100_000;
        let mean = DenseVector::from(&[3.0, 4.0][..]);
        let mut sum_sq = 0.0;
        for _ in 0..n {
            sum_sq += w.sample(&x, &mut rng).unwrap().dist_sq(&mean);
        }
        let var = sum_sq / n as f64;
        let expected = sigma * sigma * 2.0;
        // chi-square concentration: 5 standard errors of the mean of ||noise||^2
        let se = (2.0_f64 / n as f64).sqrt() * expected;
        assert!(
            (var - expected).abs() <= 5.0 * se,
            "var {var} vs {expected}"
        );
    }

    #[test]
    fn shared_seed_difference_cancels_constant_noise() {
        let inner = crate::problems::build_saddle(
            crate::problems::SaddleVariant::Bilinear,
            0.5,
            1.0,
        )
        .unwrap();
        let op = &inner.operator;
        let u = DenseVector::from(&[1.0, 0.0, -1.0, 2.0][..]);
        let v = DenseVector::from(&[0.0, 1.0, 0.5, -0.5][..]);
        for xi in [1u64, 77, 12345] {
            let du = op.sample_at(&u, xi).unwrap();
            let dv = op.sample_at(&v, xi).unwrap();
            let fu = op.mean_operator(&u).unwrap();
            let fv = op.mean_operator(&v).unwrap();
            assert!(du.sub(&dv).dist(&fu.sub(&fv)) < 1e-12);
        }
    }
}
