//! Stochastic first-order oracle contracts.
//!
//! A gradient oracle returns one unbiased (sub)gradient draw per call. An
//! operator oracle additionally supports shared-seed queries: for a fixed
//! scenario seed it is an ordinary deterministic map, so it can be evaluated
//! at several points under the same randomness (the property the
//! variance-reduced solver relies on).
//!
//! Both carry growth constants (B, G) relative to an anchor point x0,
//! certifying `E||draw(x)||^2 <= B^2 ||x - x0||^2 + G^2` (for operator
//! oracles the same bound is declared for the deviation from the mean).

use crate::error::{Error, Result};
use crate::rng::{next_scenario, RunRng};
use crate::vector::DenseVector;

/// Growth constants (B, G) anchored at a reference point.
#[derive(Debug, Clone, PartialEq)]
pub struct BGConstants {
    pub b: f64,
    pub g: f64,
    pub anchor: DenseVector,
}

impl BGConstants {
    pub fn new(b: f64, g: f64, anchor: DenseVector) -> Result<Self> {
        if !(b.is_finite() && g.is_finite() && b >= 0.0 && g >= 0.0) {
            return Err(Error::contract(format!(
                "B={b}, G={g} must be finite and nonnegative"
            )));
        }
        Ok(BGConstants { b, g, anchor })
    }

    /// The declared second-moment bound at `point`.
    pub fn bound_at(&self, point: &DenseVector) -> f64 {
        self.b * self.b * point.dist_sq(&self.anchor) + self.g * self.g
    }

    /// Valid constants for the same oracle relative to a different anchor,
    /// via ||x - a||^2 <= 2||x - a'||^2 + 2||a' - a||^2.
    pub fn reanchored(&self, new_anchor: DenseVector) -> Self {
        if new_anchor == self.anchor {
            return self.clone();
        }
        let shift_sq = new_anchor.dist_sq(&self.anchor);
        let b2 = 2.0 * self.b * self.b;
        let g2 = self.g * self.g + 2.0 * self.b * self.b * shift_sq;
        BGConstants {
            b: b2.sqrt(),
            g: g2.sqrt(),
            anchor: new_anchor,
        }
    }
}

/// An unbiased stochastic (sub)gradient oracle.
pub trait GradientOracle: Send + Sync {
    fn dimension(&self) -> usize;

    /// One stochastic draw at `point`. Deterministic given the rng state.
    fn sample(&self, point: &DenseVector, rng: &mut RunRng) -> Result<DenseVector>;

    /// An exact subgradient element, when the oracle knows one.
    fn mean_gradient(&self, point: &DenseVector) -> Option<DenseVector>;

    fn bg(&self) -> &BGConstants;
}

/// An unbiased stochastic operator oracle with shared-seed queries.
pub trait OperatorOracle: Send + Sync {
    fn dimension(&self) -> usize;

    /// Evaluates one scenario. For fixed `scenario` this is a deterministic
    /// map of `point`, re-queryable at other points.
    fn sample_at(&self, point: &DenseVector, scenario: u64) -> Result<DenseVector>;

    /// The exact mean operator, when available.
    fn mean_operator(&self, point: &DenseVector) -> Option<DenseVector>;

    fn bg(&self) -> &BGConstants;

    /// L with `E||F(u,xi) - F(v,xi)||^2 <= L^2 ||u - v||^2`.
    fn lipschitz(&self) -> f64;
}

/// Adapts an operator oracle to the gradient-oracle sampling shape by
/// drawing a fresh scenario per call. Lets the oracle diagnostics run
/// unchanged on either contract.
pub struct FreshScenarioDraws<'a>(pub &'a dyn OperatorOracle);

impl GradientOracle for FreshScenarioDraws<'_> {
    fn dimension(&self) -> usize {
        self.0.dimension()
    }

    fn sample(&self, point: &DenseVector, rng: &mut RunRng) -> Result<DenseVector> {
        self.0.sample_at(point, next_scenario(rng))
    }

    fn mean_gradient(&self, point: &DenseVector) -> Option<DenseVector> {
        self.0.mean_operator(point)
    }

    fn bg(&self) -> &BGConstants {
        self.0.bg()
    }
}
