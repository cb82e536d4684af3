//! Quadratic instances f(x) = (1/2d) <x, Qx> + <c, x> with the
//! column-sampling oracle.

use std::sync::Arc;

use nalgebra::{DMatrix, DVector};

use crate::error::{Error, Result};
use crate::oracles::{make_example1_oracle, PsdCheck};
use crate::rng::{rng_for_seed, standard_normal_vector};
use crate::sets::ConvexSetSpec;
use crate::vector::DenseVector;

use super::{AbcDemoPlan, MinProblem, MinReference, ProblemInstance};

/// What to do when c has a component outside the range of Q (no minimizer).
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum OnInconsistent {
    Error,
    /// Replace c by its projection onto range(Q) and solve that problem.
    ProjectOntoRange,
}

#[derive(Debug, Clone)]
pub enum Example1Source {
    /// Q = sym(M^T M / d) for a standard normal d x d matrix M drawn from
    /// `seed`; c = 0; x0 is a random unit vector drawn from `seed`.
    Random { d: usize, seed: u64 },
    /// Explicit data; x0 defaults to zero.
    Explicit {
        q: Vec<Vec<f64>>,
        c: Vec<f64>,
        x0: Vec<f64>,
    },
}

#[derive(Debug, Clone)]
pub struct Example1Options {
    pub source: Example1Source,
    pub on_inconsistent: OnInconsistent,
    pub trust_psd: bool,
}

impl Example1Options {
    pub fn random(d: usize, seed: u64) -> Self {
        Example1Options {
            source: Example1Source::Random { d, seed },
            on_inconsistent: OnInconsistent::Error,
            trust_psd: false,
        }
    }
}

fn least_norm_solution(
    q: &DMatrix<f64>,
    c: &DVector<f64>,
    d: usize,
    on_inconsistent: OnInconsistent,
) -> Result<(DVector<f64>, DVector<f64>)> {
    // stationarity: (1/d) Q x = -c
    let scaled = q.clone() / d as f64;
    let svd = scaled.clone().svd(true, true);
    let rhs = -c.clone();
    let x = svd
        .solve(&rhs, 1e-10)
        .map_err(Error::construction)?;
    let residual = (&scaled * &x + c).norm();
    let scale = 1.0 + c.norm();
    if residual > 1e-8 * scale {
        match on_inconsistent {
            OnInconsistent::Error => {
                return Err(Error::construction(format!(
                    "c is not in range(Q): least-norm residual {residual}; \
                     enable range projection to solve the projected problem"
                )))
            }
            OnInconsistent::ProjectOntoRange => {
                // keep only the range component of c, re-solve
                let projected_c = c - (&scaled * &x + c);
                let x2 = svd
                    .solve(&(-projected_c.clone()), 1e-10)
                    .map_err(Error::construction)?;
                return Ok((x2, projected_c));
            }
        }
    }
    Ok((x, c.clone()))
}

/// Deterministic probe cloud for coefficient fitting (axis points and a few
/// fixed diagonals at moderate scale).
fn fit_probe_cloud(d: usize) -> Vec<DenseVector> {
    let mut probes = vec![DenseVector::zeros(d)];
    for i in 0..d.min(4) {
        for s in [1.0, -1.5] {
            let mut v = vec![0.0; d];
            v[i] = s;
            probes.push(DenseVector::from_raw(v));
        }
    }
    probes.push(DenseVector::from_raw((0..d).map(|i| 0.5 + 0.1 * i as f64).collect()));
    probes
}

/// Builds a quadratic instance with the column-sampling oracle.
///
/// The reference x* solves (1/d) Q x = -c by a least-norm solve; when Q is
/// singular the instance also carries the probe plan exercising the
/// quadratic-vs-linear growth mismatch along a null direction.
pub fn build_example1_quadratic(options: &Example1Options) -> Result<ProblemInstance> {
    let (q_rows, c, x0, provenance) = match &options.source {
        Example1Source::Random { d, seed } => {
            if *d == 0 {
                return Err(Error::construction("dimension must be positive"));
            }
            let mut rng = rng_for_seed(*seed);
            let m = DMatrix::from_fn(*d, *d, |_, _| {
                rand::Rng::sample::<f64, _>(&mut rng, rand_distr::StandardNormal)
            });
            let q = (m.transpose() * &m) / *d as f64;
            let q = (q.clone() + q.transpose()) * 0.5;
            let rows: Vec<Vec<f64>> = (0..*d)
                .map(|i| (0..*d).map(|j| q[(i, j)]).collect())
                .collect();
            let x0 = standard_normal_vector(*d, &mut rng);
            let x0 = x0.scale(1.0 / x0.norm());
            (
                rows,
                vec![0.0; *d],
                x0,
                format!("random sym(M^T M/d) quadratic, seed {seed}; x* = 0 by c = 0"),
            )
        }
        Example1Source::Explicit { q, c, x0 } => (
            q.clone(),
            c.clone(),
            DenseVector::new(x0.clone())?,
            "explicit quadratic; x* by least-norm solve of (1/d) Q x = -c".to_string(),
        ),
    };

    let d = q_rows.len();
    let q_mat = DMatrix::from_fn(d, d, |i, j| q_rows[i][j]);
    let c_vec = DVector::from_row_slice(&c);
    let (x_star, c_effective) =
        least_norm_solution(&q_mat, &c_vec, d, options.on_inconsistent)?;

    let c_dense = DenseVector::new(c_effective.iter().cloned().collect())?;
    let oracle = make_example1_oracle(
        &q_rows,
        c_dense.clone(),
        x0.clone(),
        if options.trust_psd {
            PsdCheck::Trusted
        } else {
            PsdCheck::Eigenvalue
        },
    )?;

    let q_for_f = q_mat.clone();
    let c_for_f = c_dense.clone();
    let dd = d as f64;
    let f_exact: super::ScalarFn = Arc::new(move |x: &DenseVector| {
        let xv = DVector::from_row_slice(x.as_slice());
        0.5 / dd * xv.dot(&(&q_for_f * &xv)) + c_for_f.dot(x)
    });
    let q_for_g = q_mat.clone();
    let c_for_g = c_dense.clone();
    let grad_exact: super::VectorFn = Arc::new(move |x: &DenseVector| {
        let xv = DVector::from_row_slice(x.as_slice());
        let g = (&q_for_g * &xv) / dd;
        DenseVector::from_raw(g.iter().cloned().collect()).add(&c_for_g)
    });

    let x_star = DenseVector::new(x_star.iter().cloned().collect())?;
    let f_star = f_exact(&x_star);

    // null direction for the growth-mismatch demonstration, when Q is singular
    let eig = q_mat.clone().symmetric_eigen();
    let scale = eig
        .eigenvalues
        .iter()
        .cloned()
        .fold(0.0_f64, |a, b| a.max(b.abs()));
    let mut abc_demo = None;
    for (idx, lambda) in eig.eigenvalues.iter().enumerate() {
        if lambda.abs() <= 1e-10 * scale.max(1.0) {
            let dir = eig.eigenvectors.column(idx);
            abc_demo = Some(AbcDemoPlan {
                fit_probes: fit_probe_cloud(d),
                ray_direction: DenseVector::new(dir.iter().cloned().collect())?,
                ray_scales: vec![1.0, 10.0, 100.0],
            });
            break;
        }
    }

    let problem = MinProblem {
        name: "example1-quadratic".into(),
        oracle: Arc::new(oracle),
        feasible_set: ConvexSetSpec::WholeSpace { dim: d },
        f_exact,
        grad_exact: Some(grad_exact),
        reference: Some(MinReference { x_star, f_star }),
        x0,
        abc_demo,
        provenance,
    };
    problem.check_reference()?;
    Ok(ProblemInstance::Min(problem))
}

/// The fixed singular 2x2 fixture: Q = [[1,-1],[-1,1]], c = (1/2, -1/2).
/// Null direction (1,1)/sqrt(2); x* = (-1/2, 1/2), f* = -1/4 by hand.
pub fn singular_fixture_options() -> Example1Options {
    Example1Options {
        source: Example1Source::Explicit {
            q: vec![vec![1.0, -1.0], vec![-1.0, 1.0]],
            c: vec![0.5, -0.5],
            x0: vec![0.0, 0.0],
        },
        on_inconsistent: OnInconsistent::Error,
        trust_psd: false,
    }
}
