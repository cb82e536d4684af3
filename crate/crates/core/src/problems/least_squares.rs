//! Least-squares instances f(x) = (1/2m) ||Ax - b||^2 with the row-sampling
//! oracle. The reference comes from the normal equations.

use std::sync::Arc;

use nalgebra::{DMatrix, DVector};

use crate::error::{Error, Result};
use crate::oracles::make_finite_sum_least_squares_oracle;
use crate::rng::rng_for_seed;
use crate::sets::ConvexSetSpec;
use crate::vector::DenseVector;

use super::{MinProblem, MinReference, ProblemInstance};

/// Builds a random m x d instance from `seed`. With `noise_free` the right
/// hand side is consistent (b = A x-hat, so f* = 0); otherwise b carries
/// 0.5-scale Gaussian perturbations. Requires m >= d and full column rank.
pub fn build_least_squares(
    m: usize,
    d: usize,
    seed: u64,
    noise_free: bool,
) -> Result<ProblemInstance> {
    if m < d {
        return Err(Error::construction(format!(
            "need m >= d for a unique solution, got {m} < {d}"
        )));
    }
    let mut rng = rng_for_seed(seed);
    let mut draw = || rand::Rng::sample::<f64, _>(&mut rng, rand_distr::StandardNormal);
    let a = DMatrix::from_fn(m, d, |_, _| draw());
    let x_hat = DVector::from_fn(d, |_, _| draw());
    let mut b = &a * &x_hat;
    if !noise_free {
        for i in 0..m {
            b[i] += 0.5 * draw();
        }
    }
    let rows: Vec<Vec<f64>> = (0..m).map(|i| (0..d).map(|j| a[(i, j)]).collect()).collect();
    build_least_squares_explicit(&rows, b.as_slice(), &format!("random {m}x{d}, seed {seed}"))
}

/// Builds an instance from explicit data; the anchor/start point is zero.
pub fn build_least_squares_explicit(
    rows: &[Vec<f64>],
    rhs: &[f64],
    provenance_note: &str,
) -> Result<ProblemInstance> {
    let m = rows.len();
    if m == 0 {
        return Err(Error::construction("empty system"));
    }
    let d = rows[0].len();
    let a = DMatrix::from_fn(m, d, |i, j| rows[i][j]);
    let b = DVector::from_row_slice(rhs);

    let gram = a.transpose() * &a;
    let rhs_normal = a.transpose() * &b;
    let chol = gram
        .cholesky()
        .ok_or_else(|| Error::construction("rank-deficient system in unique mode"))?;
    let x_star_v = chol.solve(&rhs_normal);
    let normal_residual = (a.transpose() * (&a * &x_star_v - &b)).norm();
    if normal_residual > 1e-8 * (1.0 + b.norm()) {
        return Err(Error::construction(format!(
            "normal-equation residual {normal_residual} too large"
        )));
    }

    let x0 = DenseVector::zeros(d);
    let oracle = make_finite_sum_least_squares_oracle(rows, rhs, x0.clone())?;

    let a_f = a.clone();
    let b_f = b.clone();
    let f_exact: super::ScalarFn = Arc::new(move |x: &DenseVector| {
        let xv = DVector::from_row_slice(x.as_slice());
        (&a_f * &xv - &b_f).norm_squared() * 0.5 / m as f64
    });
    let a_g = a.clone();
    let b_g = b.clone();
    let grad_exact: super::VectorFn = Arc::new(move |x: &DenseVector| {
        let xv = DVector::from_row_slice(x.as_slice());
        let g = a_g.transpose() * (&a_g * &xv - &b_g) / m as f64;
        DenseVector::from_raw(g.iter().cloned().collect())
    });

    let x_star = DenseVector::new(x_star_v.iter().cloned().collect())?;
    let f_star = f_exact(&x_star);
    let problem = MinProblem {
        name: "least-squares".into(),
        oracle: Arc::new(oracle),
        feasible_set: ConvexSetSpec::WholeSpace { dim: d },
        f_exact,
        grad_exact: Some(grad_exact),
        reference: Some(MinReference { x_star, f_star }),
        x0,
        abc_demo: None,
        provenance: format!("{provenance_note}; x* by normal equations (Cholesky)"),
    };
    problem.check_reference()?;
    Ok(ProblemInstance::Min(problem))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn identity_system_solution_is_rhs() {
        let rows = vec![vec![1.0, 0.0], vec![0.0, 1.0]];
        let ProblemInstance::Min(p) =
            build_least_squares_explicit(&rows, &[0.3, -0.8], "identity").unwrap()
        else {
            panic!("wrong kind")
        };
        let r = p.reference.as_ref().unwrap();
        assert!(r.x_star.dist(&DenseVector::from(&[0.3, -0.8][..])) < 1e-12);
    }

    #[test]
    fn consistent_system_has_zero_optimum() {
        let ProblemInstance::Min(p) = build_least_squares(20, 5, 7, true).unwrap() else {
            panic!("wrong kind")
        };
        assert!(p.reference.as_ref().unwrap().f_star.abs() < 1e-16);
    }

    #[test]
    fn random_instance_certificate() {
        let ProblemInstance::Min(p) = build_least_squares(50, 10, 20260810, false).unwrap()
        else {
            panic!("wrong kind")
        };
        let r = p.reference.as_ref().unwrap();
        let g = p.grad_exact.as_ref().unwrap()(&r.x_star);
        assert!(g.norm() <= 1e-8);
        assert!(r.f_star > 0.0);
    }

    #[test]
    fn rank_deficient_rejected() {
        let rows = vec![vec![1.0, 1.0], vec![2.0, 2.0], vec![3.0, 3.0]];
        assert!(build_least_squares_explicit(&rows, &[1.0, 2.0, 3.0], "deficient").is_err());
    }

    #[test]
    fn m_less_than_d_rejected() {
        assert!(build_least_squares(3, 5, 1, false).is_err());
    }
}
