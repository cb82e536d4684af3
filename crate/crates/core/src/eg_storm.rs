//! Anchored extragradient with recursive variance reduction for regularized
//! min-max problems, posed as the inclusion 0 in F(z) + H(z) with H = prox-
//! friendly subdifferential blocks.
//!
//! Each iteration anchors, takes an extragradient half-step using the
//! running operator estimate g_k, a full step using a fresh shared-seed
//! draw at the midpoint, and then updates g via the recursive estimator
//!
//!   g_{k+1} = F~(z_{k+1}, xi) + (1 - alpha_k)(g_k - F~(z_k, xi)),
//!
//! reusing the same scenario xi for both draws. The certificate at each
//! midpoint is ||F(z_{k+1/2}) + h_{k+1/2}|| with
//! h_{k+1/2} = (z-bar_k - z_{k+1/2})/gamma_k - g_k, an element of
//! H(z_{k+1/2}) by the prox optimality condition, so it upper-bounds the
//! distance of 0 to (F + H)(z_{k+1/2}).

use rand::Rng;

use crate::error::{Error, Result};
use crate::oracle::OperatorOracle;
use crate::prox::{prox, ProxFunctionSpec};
use crate::rng::{next_scenario, rng_for_scenario, RunRng};
use crate::vector::{anchor_blend, DenseVector};

/// Schedule values for one iteration.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EgSchedule {
    pub beta: f64,
    pub alpha: f64,
    pub gamma: f64,
    pub tau: f64,
}

/// beta_k = alpha_k/2 = 1/(k+3), gamma_k = (1-beta_k)/(6L),
/// tau_k = min(1/4, L^2/(12 B^2)) / sqrt(k+3); B = 0 takes the 1/4 branch.
pub fn eg_schedule_at(lipschitz: f64, b: f64, k: usize) -> Result<EgSchedule> {
    if !(lipschitz.is_finite() && lipschitz > 0.0) {
        return Err(Error::config(format!("L = {lipschitz} must be positive")));
    }
    let kf = k as f64;
    let beta = 1.0 / (kf + 3.0);
    let tau_scale = if b > 0.0 {
        (0.25_f64).min(lipschitz * lipschitz / (12.0 * b * b))
    } else {
        0.25
    };
    Ok(EgSchedule {
        beta,
        alpha: 2.0 * beta,
        gamma: (1.0 - beta) / (6.0 * lipschitz),
        tau: tau_scale / (kf + 3.0).sqrt(),
    })
}

#[derive(Debug, Clone)]
pub struct EgState {
    pub z: DenseVector,
    /// Running variance-reduced estimate of F(z_k).
    pub g: DenseVector,
    pub k: usize,
}

#[derive(Debug, Clone)]
pub struct EgStepOutput {
    pub next: EgState,
    pub anchored: DenseVector,
    pub midpoint: DenseVector,
    /// The H(z_{k+1/2}) element certified by the half-step prox.
    pub h_mid: DenseVector,
}

/// One full iteration. `xi_next` is used for both draws of the estimator
/// update, per the shared-seed contract.
pub fn eg_storm_step(
    state: &EgState,
    anchor: &DenseVector,
    operator: &dyn OperatorOracle,
    prox_part: &ProxFunctionSpec,
    sched: &EgSchedule,
    xi_half: u64,
    xi_next: u64,
) -> Result<EgStepOutput> {
    let k = state.k;
    let anchored = anchor_blend(sched.beta, anchor, &state.z);
    let midpoint = prox(
        prox_part,
        sched.gamma,
        &anchored.axpy(-sched.gamma, &state.g),
    )?;
    let draw_mid = operator.sample_at(&midpoint, xi_half)?;
    if !draw_mid.is_finite() {
        return Err(Error::NonFinite {
            what: "midpoint draw".into(),
            k,
        });
    }
    let tg = sched.tau * sched.gamma;
    let z_next = prox(prox_part, tg, &anchored.axpy(-tg, &draw_mid))?;
    let draw_next = operator.sample_at(&z_next, xi_next)?;
    let draw_old = operator.sample_at(&state.z, xi_next)?;
    if !draw_next.is_finite() || !draw_old.is_finite() {
        return Err(Error::NonFinite {
            what: "estimator draw".into(),
            k,
        });
    }
    let g_next = draw_next.add(&state.g.sub(&draw_old).scale(1.0 - sched.alpha));
    let h_mid = anchored.sub(&midpoint).scale(1.0 / sched.gamma).sub(&state.g);
    Ok(EgStepOutput {
        next: EgState {
            z: z_next,
            g: g_next,
            k: k + 1,
        },
        anchored,
        midpoint,
        h_mid,
    })
}

/// Evaluates the residual certificate ||F(z_{k+1/2}) + h_{k+1/2}||.
///
/// Uses the exact mean operator when the oracle has one; otherwise a Monte
/// Carlo estimate over `mc_samples` fresh scenarios (the `bool` in the
/// return marks the estimated case). With no mean and no sampling budget
/// this is a configuration error.
pub fn residual_surrogate(
    operator: &dyn OperatorOracle,
    midpoint: &DenseVector,
    h_mid: &DenseVector,
    mc_samples: Option<usize>,
    rng: &mut RunRng,
) -> Result<(f64, bool)> {
    if let Some(f_mid) = operator.mean_operator(midpoint) {
        return Ok((f_mid.add(h_mid).norm(), false));
    }
    let samples = mc_samples.ok_or_else(|| {
        Error::config("no exact mean operator and Monte Carlo residual estimation disabled")
    })?;
    if samples == 0 {
        return Err(Error::config("mc_samples must be >= 1"));
    }
    let mut acc = DenseVector::zeros(operator.dimension());
    for _ in 0..samples {
        acc = acc.add(&operator.sample_at(midpoint, next_scenario(rng))?);
    }
    let f_est = acc.scale(1.0 / samples as f64);
    Ok((f_est.add(h_mid).norm(), true))
}

/// Normalized output-index distribution Pr(k-hat = k) ~ sqrt(k+3), k < K.
pub fn output_index_probabilities(iterations: usize) -> Vec<f64> {
    let weights: Vec<f64> = (0..iterations).map(|k| (k as f64 + 3.0).sqrt()).collect();
    let total: f64 = weights.iter().sum();
    weights.iter().map(|w| w / total).collect()
}

fn sample_output_index(iterations: usize, rng: &mut RunRng) -> usize {
    let probs = output_index_probabilities(iterations);
    let u: f64 = rng.random();
    let mut acc = 0.0;
    for (k, p) in probs.iter().enumerate() {
        acc += p;
        if u < acc {
            return k;
        }
    }
    iterations - 1
}

#[derive(Debug, Clone)]
pub struct EgRecord {
    pub k: usize,
    /// Squared residual certificate at the midpoint of step k.
    pub residual_sq: f64,
    /// The averaging weight sqrt(k+3).
    pub weight: f64,
    /// Running weighted average of squared residuals over steps 0..=k.
    pub weighted_avg_sq: f64,
}

#[derive(Debug, Clone)]
pub struct EgRunResult {
    pub trace: Vec<EgRecord>,
    /// The randomly selected output step k-hat.
    pub output_index: usize,
    /// The midpoint z_{k-hat+1/2}.
    pub output_point: DenseVector,
    /// Final weighted average of squared residuals over the whole run.
    pub weighted_avg_res_sq: f64,
    pub final_state: EgState,
    /// True when residuals were Monte Carlo estimates.
    pub residual_estimated: bool,
}

/// Runs K anchored extragradient steps from z0 with g_0 = F~(z0, xi_0),
/// recording the residual certificate per step and returning the midpoint
/// at an index sampled with probabilities proportional to sqrt(k+3).
pub fn run_eg_storm(
    operator: &dyn OperatorOracle,
    prox_part: &ProxFunctionSpec,
    z0: &DenseVector,
    iterations: usize,
    record_every: usize,
    mc_samples: Option<usize>,
    rng: &mut RunRng,
) -> Result<EgRunResult> {
    if iterations == 0 {
        return Err(Error::config("iterations must be >= 1"));
    }
    if record_every == 0 {
        return Err(Error::config("record_every must be >= 1"));
    }
    if z0.dim() != operator.dimension() || prox_part.dim() != operator.dimension() {
        return Err(Error::DimensionMismatch {
            expected: operator.dimension(),
            got: z0.dim(),
        });
    }
    prox_part.validate()?;
    let lipschitz = operator.lipschitz();
    let b = operator.bg().b;

    let g0 = operator.sample_at(z0, next_scenario(rng))?;
    let output_index = sample_output_index(iterations, rng);

    let mut state = EgState {
        z: z0.clone(),
        g: g0,
        k: 0,
    };
    let mut output_point = None;
    let mut weighted_sum = 0.0;
    let mut weight_total = 0.0;
    let mut trace = Vec::new();
    let mut estimated = false;

    for k in 0..iterations {
        let sched = eg_schedule_at(lipschitz, b, k)?;
        let xi_half = next_scenario(rng);
        let xi_next = next_scenario(rng);
        let out = eg_storm_step(&state, z0, operator, prox_part, &sched, xi_half, xi_next)?;
        if !out.next.z.is_finite() || !out.next.g.is_finite() {
            return Err(Error::NonFinite {
                what: "iterate".into(),
                k,
            });
        }
        let (res, was_estimated) =
            residual_surrogate(operator, &out.midpoint, &out.h_mid, mc_samples, rng)?;
        estimated |= was_estimated;
        let weight = (k as f64 + 3.0).sqrt();
        weighted_sum += weight * res * res;
        weight_total += weight;
        if k == output_index {
            output_point = Some(out.midpoint.clone());
        }
        let done = k + 1;
        if done % record_every == 0 || done == iterations {
            trace.push(EgRecord {
                k,
                residual_sq: res * res,
                weight,
                weighted_avg_sq: weighted_sum / weight_total,
            });
        }
        state = out.next;
    }

    Ok(EgRunResult {
        trace,
        output_index,
        output_point: output_point.expect("output index within run"),
        weighted_avg_res_sq: weighted_sum / weight_total,
        final_state: state,
        residual_estimated: estimated,
    })
}

/// Convenience for diagnostics: replays the estimator update from a frozen
/// state under one scenario, returning g_{k+1}.
pub fn storm_update(
    operator: &dyn OperatorOracle,
    z_next: &DenseVector,
    z_curr: &DenseVector,
    g_curr: &DenseVector,
    alpha: f64,
    scenario: u64,
) -> Result<DenseVector> {
    let draw_next = operator.sample_at(z_next, scenario)?;
    let draw_old = operator.sample_at(z_curr, scenario)?;
    Ok(draw_next.add(&g_curr.sub(&draw_old).scale(1.0 - alpha)))
}

// keep the scenario-derivation helper visible for the oracle docs
#[allow(unused_imports)]
use rng_for_scenario as _scenario_rng_is_the_shared_seed_contract;
