//! Benchmark problem instances with independently computed reference
//! solutions and certified oracle constants.
//!
//! References are produced by linear solves, hand KKT systems, or closed
//! forms at construction time, never by the solvers under test, and every
//! instance checks its own optimality certificate to 1e-8 before it is
//! handed out.

mod least_squares;
mod nlp;
mod quadratic;
mod saddle;
pub mod spec;

use std::sync::Arc;

pub use least_squares::build_least_squares;
pub use nlp::{build_toy_nlp, NlpVariant};
pub use quadratic::{build_example1_quadratic, Example1Options, Example1Source, OnInconsistent};
pub use saddle::{build_saddle, SaddleVariant};

use crate::error::{Error, Result};
use crate::oracle::{GradientOracle, OperatorOracle};
use crate::prox::ProxFunctionSpec;
use crate::sets::ConvexSetSpec;
use crate::vector::{DenseVector, PrimalDualPoint};

pub const CERTIFICATE_TOL: f64 = 1e-8;

pub type ScalarFn = Arc<dyn Fn(&DenseVector) -> f64 + Send + Sync>;
pub type VectorFn = Arc<dyn Fn(&DenseVector) -> DenseVector + Send + Sync>;

#[derive(Debug, Clone)]
pub struct MinReference {
    pub x_star: DenseVector,
    pub f_star: f64,
}

/// Probe plan for demonstrating that gradient/suboptimality-based variance
/// bounds fail along directions the quadratic term cannot see.
#[derive(Debug, Clone)]
pub struct AbcDemoPlan {
    /// Moderate points the coefficients are fitted on.
    pub fit_probes: Vec<DenseVector>,
    /// A unit direction annihilated by the quadratic.
    pub ray_direction: DenseVector,
    /// Scales t; the fitted bound is evaluated at t * direction.
    pub ray_scales: Vec<f64>,
}

/// A minimization instance for the anchored SGD.
pub struct MinProblem {
    pub name: String,
    pub oracle: Arc<dyn GradientOracle>,
    pub feasible_set: ConvexSetSpec,
    pub f_exact: ScalarFn,
    pub grad_exact: Option<VectorFn>,
    pub reference: Option<MinReference>,
    pub x0: DenseVector,
    pub abc_demo: Option<AbcDemoPlan>,
    pub provenance: String,
}

#[derive(Debug, Clone)]
pub struct PdReference {
    pub x_star: DenseVector,
    pub y_star: DenseVector,
    pub f_star: f64,
}

/// A functionally constrained instance for the descent-ascent solver.
pub struct ConstrainedProblem {
    pub name: String,
    pub oracle: Arc<dyn OperatorOracle>,
    pub f_exact: ScalarFn,
    pub g_exact: Vec<ScalarFn>,
    pub reference: Option<PdReference>,
    pub z0: PrimalDualPoint,
    pub provenance: String,
}

#[derive(Debug, Clone)]
pub struct InclusionReference {
    pub z_star: DenseVector,
    /// The H(z*) element witnessing 0 = F(z*) + h*.
    pub h_star: DenseVector,
}

/// A regularized min-max instance for the variance-reduced solver.
pub struct InclusionProblem {
    pub name: String,
    pub operator: Arc<dyn OperatorOracle>,
    pub prox_part: ProxFunctionSpec,
    pub reference: Option<InclusionReference>,
    pub z0: DenseVector,
    pub provenance: String,
}

pub enum ProblemInstance {
    Min(MinProblem),
    Constrained(ConstrainedProblem),
    Inclusion(InclusionProblem),
}

impl ProblemInstance {
    pub fn name(&self) -> &str {
        match self {
            ProblemInstance::Min(p) => &p.name,
            ProblemInstance::Constrained(p) => &p.name,
            ProblemInstance::Inclusion(p) => &p.name,
        }
    }

    pub fn provenance(&self) -> &str {
        match self {
            ProblemInstance::Min(p) => &p.provenance,
            ProblemInstance::Constrained(p) => &p.provenance,
            ProblemInstance::Inclusion(p) => &p.provenance,
        }
    }

    /// (B, G, L) as declared by the instance's oracle.
    pub fn constants(&self) -> (f64, f64, Option<f64>) {
        match self {
            ProblemInstance::Min(p) => (p.oracle.bg().b, p.oracle.bg().g, None),
            ProblemInstance::Constrained(p) => {
                let l = p.oracle.lipschitz();
                (
                    p.oracle.bg().b,
                    p.oracle.bg().g,
                    l.is_finite().then_some(l),
                )
            }
            ProblemInstance::Inclusion(p) => (
                p.operator.bg().b,
                p.operator.bg().g,
                Some(p.operator.lipschitz()),
            ),
        }
    }
}

impl MinProblem {
    /// Projected-stationarity certificate at the reference point.
    pub fn check_reference(&self) -> Result<()> {
        let Some(reference) = &self.reference else {
            return Ok(());
        };
        let grad = match &self.grad_exact {
            Some(g) => g(&reference.x_star),
            None => self
                .oracle
                .mean_gradient(&reference.x_star)
                .ok_or_else(|| Error::construction("no exact gradient for certificate"))?,
        };
        let stepped = reference.x_star.axpy(-1.0, &grad);
        let projected = crate::sets::project(&self.feasible_set, &stepped)?;
        let residual = projected.dist(&reference.x_star);
        if residual > CERTIFICATE_TOL {
            return Err(Error::construction(format!(
                "{}: stationarity residual {residual} above {CERTIFICATE_TOL}",
                self.name
            )));
        }
        let f_val = (self.f_exact)(&reference.x_star);
        if (f_val - reference.f_star).abs() > CERTIFICATE_TOL * (1.0 + reference.f_star.abs()) {
            return Err(Error::construction(format!(
                "{}: f(x*) = {f_val} disagrees with recorded f* = {}",
                self.name, reference.f_star
            )));
        }
        Ok(())
    }
}

impl ConstrainedProblem {
    /// KKT certificate: stationarity, complementary slackness, primal and
    /// dual feasibility.
    pub fn check_reference(&self) -> Result<()> {
        let Some(reference) = &self.reference else {
            return Ok(());
        };
        let z_star = PrimalDualPoint::new(&reference.x_star, &reference.y_star);
        let field = self
            .oracle
            .mean_operator(z_star.stacked())
            .ok_or_else(|| Error::construction("no exact mean field for KKT certificate"))?;
        let d = reference.x_star.dim();
        let stationarity = DenseVector::from(&field.as_slice()[..d]).norm();
        if stationarity > CERTIFICATE_TOL {
            return Err(Error::construction(format!(
                "{}: KKT stationarity residual {stationarity}",
                self.name
            )));
        }
        for (i, g) in self.g_exact.iter().enumerate() {
            let gi = g(&reference.x_star);
            let yi = reference.y_star.get(i);
            if gi > CERTIFICATE_TOL {
                return Err(Error::construction(format!(
                    "{}: reference infeasible, g_{i} = {gi}",
                    self.name
                )));
            }
            if yi < 0.0 {
                return Err(Error::construction(format!(
                    "{}: negative multiplier y_{i} = {yi}",
                    self.name
                )));
            }
            if (yi * gi).abs() > CERTIFICATE_TOL {
                return Err(Error::construction(format!(
                    "{}: complementary slackness violated at {i}: {}",
                    self.name,
                    yi * gi
                )));
            }
        }
        let f_val = (self.f_exact)(&reference.x_star);
        if (f_val - reference.f_star).abs() > CERTIFICATE_TOL * (1.0 + reference.f_star.abs()) {
            return Err(Error::construction(format!(
                "{}: f(x*) = {f_val} vs recorded {}",
                self.name, reference.f_star
            )));
        }
        Ok(())
    }
}

impl InclusionProblem {
    /// Inclusion certificate ||F(z*) + h*|| <= tol with h* in H(z*), plus a
    /// sampled star-monotonicity check of the mean field around z*.
    pub fn check_reference(&self) -> Result<()> {
        let Some(reference) = &self.reference else {
            return Ok(());
        };
        let f_star = self
            .operator
            .mean_operator(&reference.z_star)
            .ok_or_else(|| Error::construction("no exact mean operator for certificate"))?;
        let residual = f_star.add(&reference.h_star).norm();
        if residual > CERTIFICATE_TOL {
            return Err(Error::construction(format!(
                "{}: inclusion residual {residual}",
                self.name
            )));
        }
        if !self
            .prox_part
            .in_subdifferential(&reference.z_star, &reference.h_star, 1e-9)
        {
            return Err(Error::construction(format!(
                "{}: h* not in the subdifferential at z*",
                self.name
            )));
        }
        // star-monotonicity spot check on random points
        let mut rng = crate::rng::rng_for_seed(0x5741_524d);
        for _ in 0..100 {
            let z = reference.z_star.add(&crate::rng::standard_normal_vector(
                self.operator.dimension(),
                &mut rng,
            ));
            let fz = self
                .operator
                .mean_operator(&z)
                .ok_or_else(|| Error::construction("mean operator vanished"))?;
            let gap = fz.sub(&f_star).dot(&z.sub(&reference.z_star));
            if gap < -1e-9 {
                return Err(Error::construction(format!(
                    "{}: star-monotonicity violated: {gap}",
                    self.name
                )));
            }
        }
        Ok(())
    }
}
