//! Convex set descriptions and Euclidean projection.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::vector::DenseVector;

/// The convex sets the solvers project onto.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub enum ConvexSetSpec {
    /// R^d, projection is the identity.
    WholeSpace { dim: usize },
    /// Coordinatewise x >= 0.
    NonnegativeOrthant { dim: usize },
    /// Coordinatewise lower <= x <= upper.
    Box {
        lower: DenseVector,
        upper: DenseVector,
    },
    /// Euclidean ball of positive radius.
    L2Ball { center: DenseVector, radius: f64 },
    /// Cartesian product of component sets over consecutive blocks.
    Product(Vec<ConvexSetSpec>),
}

impl ConvexSetSpec {
    pub fn dim(&self) -> usize {
        match self {
            ConvexSetSpec::WholeSpace { dim } | ConvexSetSpec::NonnegativeOrthant { dim } => *dim,
            ConvexSetSpec::Box { lower, .. } => lower.dim(),
            ConvexSetSpec::L2Ball { center, .. } => center.dim(),
            ConvexSetSpec::Product(parts) => parts.iter().map(|p| p.dim()).sum(),
        }
    }

    /// Checks the structural invariants of the description itself.
    pub fn validate(&self) -> Result<()> {
        match self {
            ConvexSetSpec::WholeSpace { .. } | ConvexSetSpec::NonnegativeOrthant { .. } => Ok(()),
            ConvexSetSpec::Box { lower, upper } => {
                if lower.dim() != upper.dim() {
                    return Err(Error::DimensionMismatch {
                        expected: lower.dim(),
                        got: upper.dim(),
                    });
                }
                for (l, u) in lower.as_slice().iter().zip(upper.as_slice()) {
                    if l > u {
                        return Err(Error::contract(format!("box bound {l} > {u}")));
                    }
                }
                Ok(())
            }
            ConvexSetSpec::L2Ball { radius, .. } => {
                if !(radius.is_finite() && *radius > 0.0) {
                    return Err(Error::contract(format!("ball radius {radius} must be > 0")));
                }
                Ok(())
            }
            ConvexSetSpec::Product(parts) => {
                for p in parts {
                    p.validate()?;
                }
                Ok(())
            }
        }
    }

    /// Membership up to an absolute tolerance on the defining inequalities.
    pub fn contains(&self, point: &DenseVector, tol: f64) -> bool {
        if point.dim() != self.dim() {
            return false;
        }
        match self {
            ConvexSetSpec::WholeSpace { .. } => true,
            ConvexSetSpec::NonnegativeOrthant { .. } => {
                point.as_slice().iter().all(|v| *v >= -tol)
            }
            ConvexSetSpec::Box { lower, upper } => point
                .as_slice()
                .iter()
                .zip(lower.as_slice().iter().zip(upper.as_slice()))
                .all(|(v, (l, u))| *v >= l - tol && *v <= u + tol),
            ConvexSetSpec::L2Ball { center, radius } => point.dist(center) <= radius + tol,
            ConvexSetSpec::Product(parts) => {
                let mut off = 0;
                for p in parts {
                    let d = p.dim();
                    let block = DenseVector::from(&point.as_slice()[off..off + d]);
                    if !p.contains(&block, tol) {
                        return false;
                    }
                    off += d;
                }
                true
            }
        }
    }
}

/// Euclidean projection of `point` onto `set`.
pub fn project(set: &ConvexSetSpec, point: &DenseVector) -> Result<DenseVector> {
    if point.dim() != set.dim() {
        return Err(Error::DimensionMismatch {
            expected: set.dim(),
            got: point.dim(),
        });
    }
    Ok(match set {
        ConvexSetSpec::WholeSpace { .. } => point.clone(),
        ConvexSetSpec::NonnegativeOrthant { .. } => {
            DenseVector::from_raw(point.as_slice().iter().map(|v| v.max(0.0)).collect())
        }
        ConvexSetSpec::Box { lower, upper } => DenseVector::from_raw(
            point
                .as_slice()
                .iter()
                .zip(lower.as_slice().iter().zip(upper.as_slice()))
                .map(|(v, (l, u))| v.max(*l).min(*u))
                .collect(),
        ),
        ConvexSetSpec::L2Ball { center, radius } => {
            let diff = point.sub(center);
            let norm = diff.norm();
            if norm <= *radius {
                point.clone()
            } else {
                center.axpy(radius / norm, &diff)
            }
        }
        ConvexSetSpec::Product(parts) => {
            let mut out = Vec::with_capacity(point.dim());
            let mut off = 0;
            for p in parts {
                let d = p.dim();
                let block = DenseVector::from(&point.as_slice()[off..off + d]);
                out.extend_from_slice(project(p, &block)?.as_slice());
                off += d;
            }
            DenseVector::from_raw(out)
        }
    })
}
