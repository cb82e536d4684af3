//! Constraint-sampling Lagrangian operator oracle.
//!
//! For min f(x) s.t. g_i(x) <= 0, i = 1..n, with L(x, y) = f(x) + sum y_i g_i(x),
//! the oracle draws one constraint index i uniformly and returns
//!
//!   F~(z) = ( grad~f(x) + n * y_i * grad~g_i(x),  -n * g~_i(x) * e_i ),
//!
//! the descent-ascent field (grad_x L, -grad_y L). The factor n makes the
//! single-index draw unbiased. Negative y inputs are accepted here; keeping
//! the dual iterate in the nonnegative orthant is the solver's projection.

use std::sync::Arc;

use rand::Rng;

use crate::error::{Error, Result};
use crate::oracle::{BGConstants, GradientOracle, OperatorOracle};
use crate::rng::{rng_for_scenario, RunRng};
use crate::vector::DenseVector;

/// One stochastic constraint value draw: (x, rng) -> g~_i(x).
pub type ValueOracle = Arc<dyn Fn(&DenseVector, &mut RunRng) -> f64 + Send + Sync>;

/// Exact constraint value, used for mean computations and reporting.
pub type ExactValue = Arc<dyn Fn(&DenseVector) -> f64 + Send + Sync>;

/// The per-constraint oracle bundle.
#[derive(Clone)]
pub struct ConstraintOracles {
    pub value: ValueOracle,
    pub gradient: Arc<dyn GradientOracle>,
    /// Exact g_i, when known; enables the exact mean operator.
    pub exact_value: Option<ExactValue>,
}

pub struct LagrangianOracle {
    f_grad: Arc<dyn GradientOracle>,
    constraints: Vec<ConstraintOracles>,
    bg: BGConstants,
    lipschitz: f64,
    primal_dim: usize,
}

/// Assembles the operator oracle over z = (x, y). `bg` and `lipschitz` are
/// declared by the caller (validated empirically by the diagnostics).
pub fn make_lagrangian_oracle(
    f_oracle: Arc<dyn GradientOracle>,
    constraints: Vec<ConstraintOracles>,
    bg: BGConstants,
    lipschitz: f64,
) -> Result<LagrangianOracle> {
    if constraints.is_empty() {
        return Err(Error::construction("need at least one constraint"));
    }
    let d = f_oracle.dimension();
    for c in &constraints {
        if c.gradient.dimension() != d {
            return Err(Error::DimensionMismatch {
                expected: d,
                got: c.gradient.dimension(),
            });
        }
    }
    if bg.anchor.dim() != d + constraints.len() {
        return Err(Error::DimensionMismatch {
            expected: d + constraints.len(),
            got: bg.anchor.dim(),
        });
    }
    Ok(LagrangianOracle {
        f_grad: f_oracle,
        constraints,
        bg,
        lipschitz,
        primal_dim: d,
    })
}

impl LagrangianOracle {
    pub fn primal_dim(&self) -> usize {
        self.primal_dim
    }

    pub fn num_constraints(&self) -> usize {
        self.constraints.len()
    }
}

impl OperatorOracle for LagrangianOracle {
    fn dimension(&self) -> usize {
        self.primal_dim + self.constraints.len()
    }

    fn sample_at(&self, point: &DenseVector, scenario: u64) -> Result<DenseVector> {
        if point.dim() != self.dimension() {
            return Err(Error::DimensionMismatch {
                expected: self.dimension(),
                got: point.dim(),
            });
        }
        let mut rng = rng_for_scenario(scenario);
        let n = self.constraints.len();
        let x = DenseVector::from(&point.as_slice()[..self.primal_dim]);
        let y_i_at = |i: usize| point.get(self.primal_dim + i);

        let i = rng.random_range(0..n);
        let cons = &self.constraints[i];
        let mut x_block = self.f_grad.sample(&x, &mut rng)?;
        x_block.axpy_mut(n as f64 * y_i_at(i), &cons.gradient.sample(&x, &mut rng)?);
        let gval = (cons.value)(&x, &mut rng);

        let mut out = x_block.into_vec();
        out.extend(std::iter::repeat(0.0).take(n));
        out[self.primal_dim + i] = -(n as f64) * gval;
        Ok(DenseVector::from_raw(out))
    }

    fn mean_operator(&self, point: &DenseVector) -> Option<DenseVector> {
        let x = DenseVector::from(&point.as_slice()[..self.primal_dim]);
        let mut x_block = self.f_grad.mean_gradient(&x)?;
        let mut y_block = Vec::with_capacity(self.constraints.len());
        for (i, cons) in self.constraints.iter().enumerate() {
            let gi = cons.gradient.mean_gradient(&x)?;
            x_block.axpy_mut(point.get(self.primal_dim + i), &gi);
            y_block.push(-(cons.exact_value.as_ref()?)(&x));
        }
        let mut out = x_block.into_vec();
        out.extend(y_block);
        Some(DenseVector::from_raw(out))
    }

    fn bg(&self) -> &BGConstants {
        &self.bg
    }

    fn lipschitz(&self) -> f64 {
        self.lipschitz
    }
}

/// A deterministic gradient oracle from a closure (B = 0 style components).
pub struct DeterministicGradient {
    pub dim: usize,
    pub grad: Arc<dyn Fn(&DenseVector) -> DenseVector + Send + Sync>,
    pub bg: BGConstants,
}

impl GradientOracle for DeterministicGradient {
    fn dimension(&self) -> usize {
        self.dim
    }

    fn sample(&self, point: &DenseVector, _rng: &mut RunRng) -> Result<DenseVector> {
        Ok((self.grad)(point))
    }

    fn mean_gradient(&self, point: &DenseVector) -> Option<DenseVector> {
        Some((self.grad)(point))
    }

    fn bg(&self) -> &BGConstants {
        &self.bg
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    /// min x s.t. -x <= 0 in one dimension: F(z) = (1 - y, x).
    fn one_d_instance() -> LagrangianOracle {
        let f = Arc::new(DeterministicGradient {
            dim: 1,
            grad: Arc::new(|_| DenseVector::from(&[1.0][..])),
            bg: BGConstants::new(0.0, 1.0, DenseVector::zeros(1)).unwrap(),
        });
        let g_grad = Arc::new(DeterministicGradient {
            dim: 1,
            grad: Arc::new(|_| DenseVector::from(&[-1.0][..])),
            bg: BGConstants::new(0.0, 1.0, DenseVector::zeros(1)).unwrap(),
        });
        let cons = ConstraintOracles {
            value: Arc::new(|x: &DenseVector, _: &mut RunRng| -x.get(0)),
            gradient: g_grad,
            exact_value: Some(Arc::new(|x: &DenseVector| -x.get(0))),
        };
        make_lagrangian_oracle(
            f,
            vec![cons],
            BGConstants::new(2.0, 4.0, DenseVector::zeros(2)).unwrap(),
            2.0,
        )
        .unwrap()
    }

    #[test]
    fn sign_convention_on_hand_instance() {
        let oracle = one_d_instance();
        let z = DenseVector::from(&[2.0, 3.0][..]);
        let f = oracle.sample_at(&z, 17).unwrap();
        // (grad_x L, -grad_y L) = (1 - y, x) = (-2, 2)
        assert!(f.dist(&DenseVector::from(&[-2.0, 2.0][..])) < 1e-15);
        assert_eq!(
            oracle.mean_operator(&z).unwrap().as_slice(),
            &[-2.0, 2.0]
        );
    }

    #[test]
    fn saddle_is_a_zero_of_the_field() {
        let oracle = one_d_instance();
        let saddle = DenseVector::from(&[0.0, 1.0][..]);
        assert!(oracle.mean_operator(&saddle).unwrap().norm() < 1e-15);
        // star-monotone around the saddle: <F(z) - F(z*), z - z*> >= 0
        for (x, y) in [(1.0, 3.0), (-2.0, 0.5), (0.3, 0.0), (5.0, 2.0)] {
            let z = DenseVector::from(&[x, y][..]);
            let fz = oracle.mean_operator(&z).unwrap();
            let gap = fz.dot(&z.sub(&saddle));
            assert!(gap >= -1e-12, "not star-monotone at ({x},{y}): {gap}");
        }
    }

    #[test]
    fn identical_constraints_average_out_the_factor_n() {
        // n = 2 copies of the same constraint: E over i of n*g~_i(x)*e_i = (g, g)
        let f = Arc::new(DeterministicGradient {
            dim: 1,
            grad: Arc::new(|_| DenseVector::zeros(1)),
            bg: BGConstants::new(0.0, 0.0, DenseVector::zeros(1)).unwrap(),
        });
        let mk = || ConstraintOracles {
            value: Arc::new(|x: &DenseVector, _: &mut RunRng| x.get(0) - 1.0),
            gradient: Arc::new(DeterministicGradient {
                dim: 1,
                grad: Arc::new(|_| DenseVector::from(&[1.0][..])),
                bg: BGConstants::new(0.0, 1.0, DenseVector::zeros(1)).unwrap(),
            }),
            exact_value: Some(Arc::new(|x: &DenseVector| x.get(0) - 1.0)),
        };
        let oracle = make_lagrangian_oracle(
            f,
            vec![mk(), mk()],
            BGConstants::new(4.0, 8.0, DenseVector::zeros(3)).unwrap(),
            4.0,
        )
        .unwrap();
        let z = DenseVector::from(&[3.0, 0.5, 0.25][..]);
        // empirical mean of the y-block over many scenarios
        let mut acc = DenseVector::zeros(3);
        let n_draws = 4000;
        for s in 0..n_draws {
            acc = acc.add(&oracle.sample_at(&z, s).unwrap());
        }
        let avg = acc.scale(1.0 / n_draws as f64);
        let mean = oracle.mean_operator(&z).unwrap();
        assert_eq!(mean.as_slice()[1..], [-2.0, -2.0]);
        for i in 0..3 {
            assert!((avg.get(i) - mean.get(i)).abs() < 0.15, "coord {i}");
        }
    }
}
