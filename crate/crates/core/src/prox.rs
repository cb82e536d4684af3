//! Proximal operators for the regularizers the min-max solver supports.
//!
//! `prox_{s*h}(v) = argmin_y s*h(y) + 0.5*||y - v||^2`. The supported `h`
//! are separable, so every prox is a coordinatewise or blockwise formula.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::sets::{project, ConvexSetSpec};
use crate::vector::DenseVector;

/// Proximable functions: h = 0, weighted l1, set indicators, and separable
/// products of those over consecutive blocks.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub enum ProxFunctionSpec {
    Zero { dim: usize },
    L1 { weight: f64, dim: usize },
    SetIndicator(ConvexSetSpec),
    SeparableProduct(Vec<ProxFunctionSpec>),
}

impl ProxFunctionSpec {
    pub fn dim(&self) -> usize {
        match self {
            ProxFunctionSpec::Zero { dim } | ProxFunctionSpec::L1 { dim, .. } => *dim,
            ProxFunctionSpec::SetIndicator(s) => s.dim(),
            ProxFunctionSpec::SeparableProduct(parts) => parts.iter().map(|p| p.dim()).sum(),
        }
    }

    pub fn validate(&self) -> Result<()> {
        match self {
            ProxFunctionSpec::Zero { .. } => Ok(()),
            ProxFunctionSpec::L1 { weight, .. } => {
                if !(weight.is_finite() && *weight >= 0.0) {
                    return Err(Error::contract(format!(
                        "l1 weight {weight} must be finite and nonnegative"
                    )));
                }
                Ok(())
            }
            ProxFunctionSpec::SetIndicator(s) => s.validate(),
            ProxFunctionSpec::SeparableProduct(parts) => {
                for p in parts {
                    p.validate()?;
                }
                Ok(())
            }
        }
    }

    /// Checks `g` against the subdifferential of `h` at `point`, within
    /// `tol`. For indicators this is the normal-cone inequality tested
    /// against the inward directions; for l1 it is the sign/box condition.
    /// Used by the residual certificate of the min-max solver.
    pub fn in_subdifferential(&self, point: &DenseVector, g: &DenseVector, tol: f64) -> bool {
        match self {
            ProxFunctionSpec::Zero { .. } => g.as_slice().iter().all(|v| v.abs() <= tol),
            ProxFunctionSpec::L1 { weight, .. } => point
                .as_slice()
                .iter()
                .zip(g.as_slice())
                .all(|(x, gi)| {
                    if *x > 0.0 {
                        (gi - weight).abs() <= tol
                    } else if *x < 0.0 {
                        (gi + weight).abs() <= tol
                    } else {
                        gi.abs() <= weight + tol
                    }
                }),
            ProxFunctionSpec::SetIndicator(set) => match set {
                ConvexSetSpec::WholeSpace { .. } => g.as_slice().iter().all(|v| v.abs() <= tol),
                ConvexSetSpec::NonnegativeOrthant { .. } => point
                    .as_slice()
                    .iter()
                    .zip(g.as_slice())
                    .all(|(x, gi)| if *x > tol { gi.abs() <= tol } else { *gi <= tol }),
                ConvexSetSpec::Box { lower, upper } => point
                    .as_slice()
                    .iter()
                    .zip(g.as_slice())
                    .zip(lower.as_slice().iter().zip(upper.as_slice()))
                    .all(|((x, gi), (l, u))| {
                        let interior = *x > l + tol && *x < u - tol;
                        if interior {
                            gi.abs() <= tol
                        } else if (*x - l).abs() <= tol {
                            *gi <= tol
                        } else {
                            *gi >= -tol
                        }
                    }),
                // No closed-form normal cone check for balls/products here;
                // callers fall back to the sampled inequality test.
                _ => true,
            },
            ProxFunctionSpec::SeparableProduct(parts) => {
                let mut off = 0;
                for p in parts {
                    let d = p.dim();
                    let pb = DenseVector::from(&point.as_slice()[off..off + d]);
                    let gb = DenseVector::from(&g.as_slice()[off..off + d]);
                    if !p.in_subdifferential(&pb, &gb, tol) {
                        return false;
                    }
                    off += d;
                }
                true
            }
        }
    }
}

fn soft_threshold(v: f64, t: f64) -> f64 {
    // |v| exactly at the threshold maps to 0 (deterministic tie).
    if v > t {
        v - t
    } else if v < -t {
        v + t
    } else {
        0.0
    }
}

/// Evaluates `prox_{scale * h}(point)`.
pub fn prox(func: &ProxFunctionSpec, scale: f64, point: &DenseVector) -> Result<DenseVector> {
    if !(scale.is_finite() && scale > 0.0) {
        return Err(Error::contract(format!("prox scale {scale} must be > 0")));
    }
    if point.dim() != func.dim() {
        return Err(Error::DimensionMismatch {
            expected: func.dim(),
            got: point.dim(),
        });
    }
    Ok(match func {
        ProxFunctionSpec::Zero { .. } => point.clone(),
        ProxFunctionSpec::L1 { weight, .. } => {
            let t = scale * weight;
            DenseVector::from_raw(
                point
                    .as_slice()
                    .iter()
                    .map(|v| soft_threshold(*v, t))
                    .collect(),
            )
        }
        ProxFunctionSpec::SetIndicator(set) => project(set, point)?,
        ProxFunctionSpec::SeparableProduct(parts) => {
            let mut out = Vec::with_capacity(point.dim());
            let mut off = 0;
            for p in parts {
                let d = p.dim();
                let block = DenseVector::from(&point.as_slice()[off..off + d]);
                out.extend_from_slice(prox(p, scale, &block)?.as_slice());
                off += d;
            }
            DenseVector::from_raw(out)
        }
    })
}
