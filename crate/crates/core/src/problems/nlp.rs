//! Functionally constrained fixtures for the descent-ascent solver, with
//! hand-checked KKT references.

use std::sync::Arc;

use crate::error::Result;
use crate::oracle::{BGConstants, GradientOracle};
use crate::oracles::{
    make_additive_noise_wrapper_operator, make_lagrangian_oracle, ConstraintOracles,
    LagrangianOracle, NoiseScale,
};
use crate::rng::RunRng;
use crate::vector::{DenseVector, PrimalDualPoint};

use super::{ConstrainedProblem, PdReference, ProblemInstance, ScalarFn};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum NlpVariant {
    /// min x subject to -x <= 0; (x*, y*, f*) = (0, 1, 0).
    OneDLinear,
    /// min -x1 - x2 subject to x_i - 1 <= 0; x* = (1,1), y* = (1,1), f* = -2.
    BoxLp,
    /// min (1/6)||x - p||^2 subject to hinge caps; reference by projection
    /// onto the active halfspace.
    HingeConstrainedLs,
}

struct DetGrad {
    dim: usize,
    grad: Arc<dyn Fn(&DenseVector) -> DenseVector + Send + Sync>,
    bg: BGConstants,
}

impl GradientOracle for DetGrad {
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

fn det_grad(dim: usize, g_bound: f64, f: impl Fn(&DenseVector) -> DenseVector + Send + Sync + 'static) -> Arc<dyn GradientOracle> {
    Arc::new(DetGrad {
        dim,
        grad: Arc::new(f),
        bg: BGConstants::new(0.0, g_bound, DenseVector::zeros(dim)).unwrap(),
    })
}

fn exact_constraint(
    f: impl Fn(&DenseVector) -> f64 + Send + Sync + Clone + 'static,
    grad: Arc<dyn GradientOracle>,
) -> ConstraintOracles {
    let f2 = f.clone();
    ConstraintOracles {
        value: Arc::new(move |x: &DenseVector, _rng: &mut RunRng| f(x)),
        gradient: grad,
        exact_value: Some(Arc::new(f2)),
    }
}

fn wrap(
    lagrangian: LagrangianOracle,
    noise_sigma: f64,
) -> Arc<dyn crate::oracle::OperatorOracle> {
    if noise_sigma > 0.0 {
        Arc::new(make_additive_noise_wrapper_operator(
            lagrangian,
            NoiseScale::Constant(noise_sigma),
        ))
    } else {
        Arc::new(lagrangian)
    }
}

/// Builds one of the constrained fixtures, optionally wrapping the
/// Lagrangian field in constant-scale Gaussian noise.
pub fn build_toy_nlp(variant: NlpVariant, noise_sigma: f64) -> Result<ProblemInstance> {
    let problem = match variant {
        NlpVariant::OneDLinear => {
            let z0 = PrimalDualPoint::new(
                &DenseVector::from(&[2.0][..]),
                &DenseVector::from(&[0.0][..]),
            );
            // E||F~||^2 = (1-y)^2 + x^2 <= 2||z - z0||^2 + (2 + 2||x0||^2),
            // so B = 2 is a comfortable declared constant with
            // G^2 = 4 ||z0||^2 + 2 (noise adds sigma^2 * dim via the wrapper)
            let g_sq = 4.0 * z0.stacked().norm_sq() + 2.0;
            let f_oracle = det_grad(1, 1.0, |_| DenseVector::from(&[1.0][..]));
            let g_grad = det_grad(1, 1.0, |_| DenseVector::from(&[-1.0][..]));
            let cons = exact_constraint(|x: &DenseVector| -x.get(0), g_grad);
            let lagrangian = make_lagrangian_oracle(
                f_oracle,
                vec![cons],
                BGConstants::new(2.0, g_sq.sqrt(), z0.stacked().clone())?,
                1.0,
            )?;
            ConstrainedProblem {
                name: "toy-nlp-1d-linear".into(),
                oracle: wrap(lagrangian, noise_sigma),
                f_exact: Arc::new(|x: &DenseVector| x.get(0)),
                g_exact: vec![Arc::new(|x: &DenseVector| -x.get(0))],
                reference: Some(PdReference {
                    x_star: DenseVector::zeros(1),
                    y_star: DenseVector::from(&[1.0][..]),
                    f_star: 0.0,
                }),
                z0,
                provenance: "hand KKT: L(x,y) = x(1 - y), saddle at (0, 1)".into(),
            }
        }
        NlpVariant::BoxLp => {
            let z0 = PrimalDualPoint::new(
                &DenseVector::from(&[3.0, 3.0][..]),
                &DenseVector::zeros(2),
            );
            // E||F~||^2 <= 2||y||^2 + 2 + 2||x - 1||^2
            //           <= 4||z - z0||^2 + 2 + 4||x0 - 1||^2
            let x0_shift = DenseVector::from(&[3.0, 3.0][..])
                .dist_sq(&DenseVector::from(&[1.0, 1.0][..]));
            let g_sq = 2.0 + 4.0 * x0_shift;
            let f_oracle = det_grad(2, 2.0_f64.sqrt(), |_| {
                DenseVector::from(&[-1.0, -1.0][..])
            });
            let mut constraints = Vec::new();
            for i in 0..2usize {
                let grad = det_grad(2, 1.0, move |_| {
                    let mut e = vec![0.0; 2];
                    e[i] = 1.0;
                    DenseVector::from_raw(e)
                });
                constraints.push(exact_constraint(
                    move |x: &DenseVector| x.get(i) - 1.0,
                    grad,
                ));
            }
            let lagrangian = make_lagrangian_oracle(
                f_oracle,
                constraints,
                BGConstants::new(2.0, g_sq.sqrt(), z0.stacked().clone())?,
                2.0_f64.sqrt(),
            )?;
            ConstrainedProblem {
                name: "toy-nlp-box-lp".into(),
                oracle: wrap(lagrangian, noise_sigma),
                f_exact: Arc::new(|x: &DenseVector| -x.get(0) - x.get(1)),
                g_exact: vec![
                    Arc::new(|x: &DenseVector| x.get(0) - 1.0),
                    Arc::new(|x: &DenseVector| x.get(1) - 1.0),
                ],
                reference: Some(PdReference {
                    x_star: DenseVector::from(&[1.0, 1.0][..]),
                    y_star: DenseVector::from(&[1.0, 1.0][..]),
                    f_star: -2.0,
                }),
                z0,
                provenance: "hand KKT: vertex (1,1) with multipliers (1,1)".into(),
            }
        }
        NlpVariant::HingeConstrainedLs => {
            // f(x) = (1/6)||x - p||^2 via the row oracle on A = I3, b = p;
            // g1 = max(0, x1 + x2 - 1), g2 = max(0, x3 - 5)
            let p = [2.0, 1.0, -1.0];
            let z0 = PrimalDualPoint::new(&DenseVector::zeros(3), &DenseVector::zeros(2));
            let rows = vec![
                vec![1.0, 0.0, 0.0],
                vec![0.0, 1.0, 0.0],
                vec![0.0, 0.0, 1.0],
            ];
            let f_oracle: Arc<dyn GradientOracle> =
                Arc::new(crate::oracles::make_finite_sum_least_squares_oracle(
                    &rows,
                    &p,
                    DenseVector::zeros(3),
                )?);
            let hinge = |a: [f64; 3], b: f64| {
                move |x: &DenseVector| {
                    (a[0] * x.get(0) + a[1] * x.get(1) + a[2] * x.get(2) - b).max(0.0)
                }
            };
            // subgradient element: a on the active closure, 0 strictly inside
            let hinge_grad = |a: [f64; 3], b: f64| {
                det_grad(3, (a[0] * a[0] + a[1] * a[1] + a[2] * a[2]).sqrt(), move |x| {
                    if a[0] * x.get(0) + a[1] * x.get(1) + a[2] * x.get(2) - b >= 0.0 {
                        DenseVector::from(&a[..])
                    } else {
                        DenseVector::zeros(3)
                    }
                })
            };
            let a1 = [1.0, 1.0, 0.0];
            let a2 = [0.0, 0.0, 1.0];
            let constraints = vec![
                exact_constraint(hinge(a1, 1.0), hinge_grad(a1, 1.0)),
                exact_constraint(hinge(a2, 5.0), hinge_grad(a2, 5.0)),
            ];
            // E||F~||^2 <= 16||x||^2 + 8||y||^2 + 112 with z0 = 0
            let lagrangian = make_lagrangian_oracle(
                f_oracle,
                constraints,
                BGConstants::new(4.0, 112.0_f64.sqrt(), z0.stacked().clone())?,
                f64::INFINITY,
            )?;
            let g1 = hinge(a1, 1.0);
            let g2 = hinge(a2, 5.0);
            ConstrainedProblem {
                name: "toy-nlp-hinge-ls".into(),
                oracle: wrap(lagrangian, noise_sigma),
                f_exact: Arc::new(move |x: &DenseVector| {
                    let dx = x.sub(&DenseVector::from(&p[..]));
                    dx.norm_sq() / 6.0
                }),
                g_exact: vec![Arc::new(g1), Arc::new(g2)],
                reference: Some(PdReference {
                    // projection of p onto {x1 + x2 <= 1}: x* = (1, 0, -1),
                    // stationarity (1/3)(x* - p) + y1 a1 = 0 gives y1 = 1/3
                    x_star: DenseVector::from(&[1.0, 0.0, -1.0][..]),
                    y_star: DenseVector::from(&[1.0 / 3.0, 0.0][..]),
                    f_star: 1.0 / 3.0,
                }),
                z0,
                provenance: "halfspace projection in closed form; multiplier from stationarity"
                    .into(),
            }
        }
    };
    problem.check_reference()?;
    Ok(ProblemInstance::Constrained(problem))
}
