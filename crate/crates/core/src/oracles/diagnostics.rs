//! Empirical oracle diagnostics.
//!
//! `bg_diagnostic` estimates the second moment of oracle draws on a probe
//! set, fits nonnegative growth constants, and flags probes where a declared
//! bound is exceeded by more than sampling noise. `abc_diagnostic` fits the
//! alternative gradient/suboptimality-based bound; on oracles whose second
//! moment grows quadratically where the gradient does not, no finite fit
//! works and the residuals expose that.
//!
//! Diagnostics report; they never fail on a violation.

use nalgebra::{DMatrix, DVector};

use crate::error::{Error, Result};
use crate::oracle::GradientOracle;
use crate::rng::RunRng;
use crate::vector::DenseVector;

/// Nonnegative least squares by active-set enumeration (tiny systems only).
fn nnls(design: &[Vec<f64>], target: &[f64]) -> Vec<f64> {
    let n_vars = design[0].len();
    let rows = design.len();
    let mut best: Option<(f64, Vec<f64>)> = None;
    for mask in 0..(1u32 << n_vars) {
        let free: Vec<usize> = (0..n_vars).filter(|i| mask & (1 << i) != 0).collect();
        let coef = if free.is_empty() {
            vec![0.0; n_vars]
        } else {
            let a = DMatrix::from_fn(rows, free.len(), |r, c| design[r][free[c]]);
            let y = DVector::from_row_slice(target);
            let svd = a.svd(true, true);
            let Ok(sol) = svd.solve(&y, 1e-12) else {
                continue;
            };
            if sol.iter().any(|v| *v < 0.0 || !v.is_finite()) {
                continue;
            }
            let mut full = vec![0.0; n_vars];
            for (c, idx) in free.iter().enumerate() {
                full[*idx] = sol[c];
            }
            full
        };
        let obj: f64 = design
            .iter()
            .zip(target)
            .map(|(row, t)| {
                let pred: f64 = row.iter().zip(&coef).map(|(x, w)| x * w).sum();
                (pred - t) * (pred - t)
            })
            .sum();
        if best.as_ref().map(|(b, _)| obj < *b).unwrap_or(true) {
            best = Some((obj, coef));
        }
    }
    best.expect("all-zero candidate always feasible").1
}

/// Monte Carlo second moment of draws at one point: (mean, standard error).
pub fn empirical_second_moment(
    oracle: &dyn GradientOracle,
    point: &DenseVector,
    draws: usize,
    rng: &mut RunRng,
) -> Result<(f64, f64)> {
    let mut sum = 0.0;
    let mut sum_sq = 0.0;
    for _ in 0..draws {
        let v = oracle.sample(point, rng)?.norm_sq();
        sum += v;
        sum_sq += v * v;
    }
    let n = draws as f64;
    let mean = sum / n;
    let var = (sum_sq / n - mean * mean).max(0.0);
    Ok((mean, (var / n).sqrt()))
}

#[derive(Debug, Clone)]
pub struct BgProbeReport {
    pub dist_sq_to_anchor: f64,
    pub second_moment: f64,
    pub std_err: f64,
    pub declared_bound: f64,
    /// Set when the empirical moment exceeds the declared bound by more
    /// than 4 standard errors.
    pub flagged: bool,
}

#[derive(Debug, Clone)]
pub struct BgReport {
    pub probes: Vec<BgProbeReport>,
    pub fitted_b_sq: f64,
    pub fitted_g_sq: f64,
    /// Indices of flagged probes.
    pub violations: Vec<usize>,
}

/// Probes the oracle's second moment against its declared growth constants
/// and fits empirical ones.
pub fn bg_diagnostic(
    oracle: &dyn GradientOracle,
    probe_points: &[DenseVector],
    draws_per_point: usize,
    rng: &mut RunRng,
) -> Result<BgReport> {
    if draws_per_point < 100 {
        return Err(Error::contract(format!(
            "draws_per_point {draws_per_point} < 100"
        )));
    }
    if probe_points.is_empty() {
        return Err(Error::contract("no probe points"));
    }
    let bg = oracle.bg();
    let mut probes = Vec::with_capacity(probe_points.len());
    let mut design = Vec::with_capacity(probe_points.len());
    let mut target = Vec::with_capacity(probe_points.len());
    let mut violations = Vec::new();
    for (idx, p) in probe_points.iter().enumerate() {
        let (moment, se) = empirical_second_moment(oracle, p, draws_per_point, rng)?;
        let dist_sq = p.dist_sq(&bg.anchor);
        let declared = bg.bound_at(p);
        let flagged = moment > declared + 4.0 * se;
        if flagged {
            violations.push(idx);
        }
        design.push(vec![dist_sq, 1.0]);
        target.push(moment);
        probes.push(BgProbeReport {
            dist_sq_to_anchor: dist_sq,
            second_moment: moment,
            std_err: se,
            declared_bound: declared,
            flagged,
        });
    }
    let fit = nnls(&design, &target);
    Ok(BgReport {
        probes,
        fitted_b_sq: fit[0],
        fitted_g_sq: fit[1],
        violations,
    })
}

/// Fitted coefficients of `c^2 + b^2 ||grad f||^2 + a^2 (f - f*)`.
#[derive(Debug, Clone, Copy)]
pub struct AbcFit {
    pub a_sq: f64,
    pub b_sq: f64,
    pub c_sq: f64,
}

impl AbcFit {
    pub fn bound(&self, grad_norm_sq: f64, f_gap: f64) -> f64 {
        self.c_sq + self.b_sq * grad_norm_sq + self.a_sq * f_gap
    }
}

#[derive(Debug, Clone)]
pub struct AbcProbeResidual {
    pub second_moment: f64,
    pub fitted_bound: f64,
    /// second_moment - fitted_bound (positive = the fit under-covers here).
    pub excess: f64,
}

#[derive(Debug, Clone)]
pub struct AbcReport {
    pub fit: AbcFit,
    pub residuals: Vec<AbcProbeResidual>,
    pub max_relative_violation: f64,
}

/// Fits the gradient/suboptimality-based second-moment bound on the probes
/// and reports how badly the best fit is violated.
#[allow(clippy::too_many_arguments)]
pub fn abc_diagnostic(
    oracle: &dyn GradientOracle,
    objective_value_at: &dyn Fn(&DenseVector) -> f64,
    grad_norm_at: &dyn Fn(&DenseVector) -> f64,
    f_star: f64,
    probe_points: &[DenseVector],
    draws_per_point: usize,
    rng: &mut RunRng,
) -> Result<AbcReport> {
    if probe_points.is_empty() {
        return Err(Error::contract("no probe points"));
    }
    let mut design = Vec::with_capacity(probe_points.len());
    let mut target = Vec::with_capacity(probe_points.len());
    for p in probe_points {
        let (moment, _) = empirical_second_moment(oracle, p, draws_per_point, rng)?;
        let gn = grad_norm_at(p);
        let gap = objective_value_at(p) - f_star;
        design.push(vec![gap, gn * gn, 1.0]);
        target.push(moment);
    }
    let sol = nnls(&design, &target);
    let fit = AbcFit {
        a_sq: sol[0],
        b_sq: sol[1],
        c_sq: sol[2],
    };
    let mut residuals = Vec::with_capacity(target.len());
    let mut max_rel: f64 = 0.0;
    for (row, moment) in design.iter().zip(&target) {
        let bound = fit.bound(row[1], row[0]);
        let excess = moment - bound;
        if bound > 0.0 {
            max_rel = max_rel.max(excess / bound);
        }
        residuals.push(AbcProbeResidual {
            second_moment: *moment,
            fitted_bound: bound,
            excess,
        });
    }
    Ok(AbcReport {
        fit,
        residuals,
        max_relative_violation: max_rel,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::oracle::BGConstants;
    use crate::oracles::example1::{make_example1_oracle, PsdCheck};
    use crate::rng::rng_for_seed;

    struct ConstOracle {
        v: DenseVector,
        bg: BGConstants,
    }

    impl GradientOracle for ConstOracle {
        fn dimension(&self) -> usize {
            self.v.dim()
        }
        fn sample(&self, _p: &DenseVector, _rng: &mut RunRng) -> Result<DenseVector> {
            Ok(self.v.clone())
        }
        fn mean_gradient(&self, _p: &DenseVector) -> Option<DenseVector> {
            Some(self.v.clone())
        }
        fn bg(&self) -> &BGConstants {
            &self.bg
        }
    }

    fn probes_2d() -> Vec<DenseVector> {
        vec![
            DenseVector::zeros(2),
            DenseVector::from(&[1.0, 0.0][..]),
            DenseVector::from(&[0.0, -2.0][..]),
            DenseVector::from(&[3.0, 1.0][..]),
            DenseVector::from(&[-2.0, 2.0][..]),
        ]
    }

    #[test]
    fn constant_oracle_fit() {
        let o = ConstOracle {
            v: DenseVector::from(&[3.0, 4.0][..]),
            bg: BGConstants::new(0.0, 5.0, DenseVector::zeros(2)).unwrap(),
        };
        let mut rng = rng_for_seed(1);
        let rep = bg_diagnostic(&o, &probes_2d(), 200, &mut rng).unwrap();
        assert!(rep.violations.is_empty());
        assert!(rep.fitted_b_sq.abs() < 1e-9);
        assert!((rep.fitted_g_sq - 25.0).abs() < 1e-9);
        for p in &rep.probes {
            assert!((p.second_moment - 25.0).abs() < 1e-12);
        }
    }

    #[test]
    fn column_oracle_moment_matches_enumeration() {
        // Q = I2, c = 0, probe (2,0): draws have squared norm 4 or 0, mean 2
        let o = make_example1_oracle(
            &[vec![1.0, 0.0], vec![0.0, 1.0]],
            DenseVector::zeros(2),
            DenseVector::zeros(2),
            PsdCheck::Eigenvalue,
        )
        .unwrap();
        let mut rng = rng_for_seed(2);
        let probe = vec![DenseVector::from(&[2.0, 0.0][..])];
        let rep = bg_diagnostic(&o, &probe, 40_000, &mut rng).unwrap();
        let p = &rep.probes[0];
        assert!(
            (p.second_moment - 2.0).abs() <= 5.0 * p.std_err,
            "moment {} se {}",
            p.second_moment,
            p.std_err
        );
        assert!(rep.violations.is_empty());
    }

    #[test]
    fn understated_constants_get_flagged() {
        // declare (B=0, G=1) for an oracle whose moment grows with ||x||
        let base = make_example1_oracle(
            &[vec![1.0, 0.0], vec![0.0, 1.0]],
            DenseVector::zeros(2),
            DenseVector::zeros(2),
            PsdCheck::Eigenvalue,
        )
        .unwrap();
        struct Understated<O>(O, BGConstants);
        impl<O: GradientOracle> GradientOracle for Understated<O> {
            fn dimension(&self) -> usize {
                self.0.dimension()
            }
            fn sample(&self, p: &DenseVector, rng: &mut RunRng) -> Result<DenseVector> {
                self.0.sample(p, rng)
            }
            fn mean_gradient(&self, p: &DenseVector) -> Option<DenseVector> {
                self.0.mean_gradient(p)
            }
            fn bg(&self) -> &BGConstants {
                &self.1
            }
        }
        let o = Understated(
            base,
            BGConstants::new(0.0, 1.0, DenseVector::zeros(2)).unwrap(),
        );
        let mut rng = rng_for_seed(3);
        let far = vec![
            DenseVector::from(&[10.0, 0.0][..]),
            DenseVector::from(&[0.0, 20.0][..]),
        ];
        let rep = bg_diagnostic(&o, &far, 1000, &mut rng).unwrap();
        assert!(!rep.violations.is_empty());
    }

    #[test]
    fn draws_floor_enforced() {
        let o = ConstOracle {
            v: DenseVector::zeros(1),
            bg: BGConstants::new(0.0, 0.0, DenseVector::zeros(1)).unwrap(),
        };
        let mut rng = rng_for_seed(4);
        assert!(bg_diagnostic(&o, &[DenseVector::zeros(1)], 99, &mut rng).is_err());
    }

    #[test]
    fn abc_fit_on_bounded_oracle() {
        // bounded draws: c^2 ~ G^2 feasible with a = b = 0
        let o = ConstOracle {
            v: DenseVector::from(&[3.0, 4.0][..]),
            bg: BGConstants::new(0.0, 5.0, DenseVector::zeros(2)).unwrap(),
        };
        let mut rng = rng_for_seed(5);
        let rep = abc_diagnostic(
            &o,
            &|_| 1.0,
            &|_| 0.0,
            0.0,
            &probes_2d(),
            200,
            &mut rng,
        )
        .unwrap();
        assert!(rep.max_relative_violation < 1e-9);
        assert!((rep.fit.bound(0.0, 1.0) - 25.0).abs() < 1e-6);
    }

    #[test]
    fn abc_exact_for_deterministic_gradient() {
        // deterministic smooth gradient oracle: moment = ||grad f||^2, so
        // b^2 = 1 fits with zero residual
        struct GradOracle {
            bg: BGConstants,
        }
        impl GradientOracle for GradOracle {
            fn dimension(&self) -> usize {
                2
            }
            fn sample(&self, p: &DenseVector, _rng: &mut RunRng) -> Result<DenseVector> {
                Ok(p.scale(2.0))
            }
            fn mean_gradient(&self, p: &DenseVector) -> Option<DenseVector> {
                Some(p.scale(2.0))
            }
            fn bg(&self) -> &BGConstants {
                &self.bg
            }
        }
        let o = GradOracle {
            bg: BGConstants::new(2.0, 0.0, DenseVector::zeros(2)).unwrap(),
        };
        let mut rng = rng_for_seed(6);
        let rep = abc_diagnostic(
            &o,
            &|p| p.norm_sq(),
            &|p| 2.0 * p.norm(),
            0.0,
            &probes_2d(),
            150,
            &mut rng,
        )
        .unwrap();
        assert!(rep.max_relative_violation < 1e-9);
        for r in &rep.residuals {
            assert!(r.excess.abs() < 1e-9);
        }
    }
}
