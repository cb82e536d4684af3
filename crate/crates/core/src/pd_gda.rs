//! Anchored stochastic gradient descent-ascent for functionally constrained
//! convex programs.
//!
//! Works on the stacked point z = (x, y) with the constraint-sampling
//! Lagrangian field F~(z) = (grad_x L, -grad_y L):
//!
//!   z_{k+1} = P_Z( beta_k z0 + (1 - beta_k) z_k - tau_k F~(z_k) ),
//!
//! where Z = R^d x R^n_+ (identity on the primal block, clamp on the dual
//! block). With beta_k = 1/(k+2) and tau_k = 1/(5 B sqrt(k+2)) the
//! tau-weighted primal average satisfies objective-suboptimality and
//! feasibility bounds decaying at 1/sqrt(k) up to logs, with no bounded
//! domain assumption.

use crate::error::{Error, Result};
use crate::oracle::{BGConstants, OperatorOracle};
use crate::rng::{next_scenario, RunRng};
use crate::vector::{anchor_blend, DenseVector, PrimalDualPoint};

/// Returns (beta_k, tau_k) = (1/(k+2), 1/(5 B sqrt(k+2))).
pub fn pd_schedule_at(bg: &BGConstants, k: usize) -> Result<(f64, f64)> {
    if bg.b <= 0.0 {
        return Err(Error::config(
            "descent-ascent schedule divides by B; supply custom steps for B = 0",
        ));
    }
    let kf = k as f64;
    Ok((1.0 / (kf + 2.0), 1.0 / (5.0 * bg.b * (kf + 2.0).sqrt())))
}

/// One anchored descent-ascent step: a single Lagrangian draw (one sampled
/// constraint index), then the blocked projection. beta = 1 (pure anchor)
/// is legal as a degenerate case.
pub fn pd_gda_step(
    z_k: &PrimalDualPoint,
    anchor: &PrimalDualPoint,
    oracle: &dyn OperatorOracle,
    beta_k: f64,
    tau_k: f64,
    rng: &mut RunRng,
) -> Result<PrimalDualPoint> {
    if !(beta_k > 0.0 && beta_k <= 1.0) {
        return Err(Error::contract(format!("beta {beta_k} outside (0, 1]")));
    }
    if tau_k < 0.0 {
        return Err(Error::contract(format!("tau {tau_k} must be >= 0")));
    }
    let draw = oracle.sample_at(z_k.stacked(), next_scenario(rng))?;
    if !draw.is_finite() {
        return Err(Error::NonFinite {
            what: "Lagrangian draw".into(),
            k: 0,
        });
    }
    let pre = anchor_blend(beta_k, anchor.stacked(), z_k.stacked()).axpy(-tau_k, &draw);
    // P_Z: identity on x, nonnegative clamp on y
    let split = z_k.split();
    let mut v = pre.into_vec();
    for item in v.iter_mut().skip(split) {
        *item = item.max(0.0);
    }
    PrimalDualPoint::from_stacked(DenseVector::from_raw(v), split)
}

/// One recorded row of a descent-ascent run.
#[derive(Debug, Clone)]
pub struct PdRecord {
    pub k: usize,
    /// |f(x_k^out) - f*| with the exact objective, when f* is known.
    pub subopt_out: Option<f64>,
    /// sum_i max(0, g_i(x_k^out)) with the exact constraints.
    pub feasibility_out: f64,
    pub dist_to_anchor: f64,
    pub dual_avg_norm: f64,
}

#[derive(Debug, Clone)]
pub struct PdRunResult {
    pub primal_average: DenseVector,
    pub dual_average: DenseVector,
    pub final_point: PrimalDualPoint,
    pub trace: Vec<PdRecord>,
}

/// Exact evaluation callbacks for reporting (never used by the solver steps).
pub struct PdEvaluation<'a> {
    pub f_exact: &'a (dyn Fn(&DenseVector) -> f64 + Sync),
    pub g_exact: &'a [std::sync::Arc<dyn Fn(&DenseVector) -> f64 + Send + Sync>],
    pub f_star: Option<f64>,
}

/// Runs the anchored descent-ascent method. The primal/dual averages use
/// weights tau_i over i = 0..k-1, matching the averaged-output definition;
/// metrics are evaluated with the exact callbacks at the recording cadence.
pub fn run_pd_gda(
    oracle: &dyn OperatorOracle,
    eval: &PdEvaluation<'_>,
    z0: &PrimalDualPoint,
    max_iterations: usize,
    record_every: usize,
    rng: &mut RunRng,
) -> Result<PdRunResult> {
    if max_iterations == 0 || record_every == 0 {
        return Err(Error::config("max_iterations and record_every must be >= 1"));
    }
    if z0.stacked().dim() != oracle.dimension() {
        return Err(Error::DimensionMismatch {
            expected: oracle.dimension(),
            got: z0.stacked().dim(),
        });
    }
    if z0.y().as_slice().iter().any(|v| *v < 0.0) {
        return Err(Error::contract("initial dual block must be nonnegative"));
    }
    let bg = oracle.bg();
    let split = z0.split();
    let mut z = z0.clone();
    let mut primal_sum = DenseVector::zeros(split);
    let mut dual_sum = DenseVector::zeros(z0.stacked().dim() - split);
    let mut weight = 0.0;
    let mut trace = Vec::new();

    for k in 0..max_iterations {
        let (beta, tau) = pd_schedule_at(bg, k)?;
        primal_sum.axpy_mut(tau, &z.x());
        dual_sum.axpy_mut(tau, &z.y());
        weight += tau;
        z = pd_gda_step(&z, z0, oracle, beta, tau, rng).map_err(|e| match e {
            Error::NonFinite { what, .. } => Error::NonFinite { what, k },
            other => other,
        })?;
        if !z.stacked().is_finite() {
            return Err(Error::NonFinite {
                what: "iterate".into(),
                k,
            });
        }
        let done = k + 1;
        if done % record_every == 0 || done == max_iterations {
            let x_out = primal_sum.scale(1.0 / weight);
            let y_out = dual_sum.scale(1.0 / weight);
            let feasibility = eval
                .g_exact
                .iter()
                .map(|g| g(&x_out).max(0.0))
                .sum::<f64>();
            trace.push(PdRecord {
                k: done,
                subopt_out: eval.f_star.map(|fs| ((eval.f_exact)(&x_out) - fs).abs()),
                feasibility_out: feasibility,
                dist_to_anchor: z.stacked().dist(z0.stacked()),
                dual_avg_norm: y_out.norm(),
            });
        }
    }

    Ok(PdRunResult {
        primal_average: primal_sum.scale(1.0 / weight),
        dual_average: dual_sum.scale(1.0 / weight),
        final_point: z,
        trace,
    })
}
