//! Regularized bilinear saddle fixtures posed as inclusions
//! 0 in F(z) + H(z), with references checked by the inclusion residual.

use std::sync::Arc;

use nalgebra::DMatrix;

use crate::error::{Error, Result};
use crate::oracle::{BGConstants, OperatorOracle};
use crate::oracles::{make_additive_noise_wrapper_operator, NoiseScale};
use crate::prox::ProxFunctionSpec;
use crate::sets::ConvexSetSpec;
use crate::vector::DenseVector;

use super::{InclusionProblem, InclusionReference, ProblemInstance};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SaddleVariant {
    /// Coupling <x, My> with a rotation M; h = 0, z* at the origin.
    Bilinear,
    /// M = I with linear terms and h_1 = lambda ||x||_1; z* has a zero
    /// coordinate certified through the l1 subdifferential box.
    L1Bilinear,
    /// M = I with linear terms and h = indicator of the nonnegative
    /// orthants; active constraints at z*.
    NonnegBilinear,
}

/// Deterministic affine field F(z) = Jz + offset with L = sigma_max(J).
pub struct AffineOperator {
    rows: Vec<DenseVector>,
    offset: DenseVector,
    bg: BGConstants,
    lipschitz: f64,
}

impl AffineOperator {
    pub fn new(jacobian: Vec<Vec<f64>>, offset: DenseVector) -> Result<Self> {
        let dim = offset.dim();
        if jacobian.len() != dim || jacobian.iter().any(|r| r.len() != dim) {
            return Err(Error::construction("jacobian shape mismatch"));
        }
        let m = DMatrix::from_fn(dim, dim, |i, j| jacobian[i][j]);
        let lipschitz = m
            .svd(false, false)
            .singular_values
            .iter()
            .cloned()
            .fold(0.0_f64, f64::max);
        Ok(AffineOperator {
            rows: jacobian
                .into_iter()
                .map(DenseVector::from_raw)
                .collect(),
            offset,
            // deterministic field: zero deviation from its mean
            bg: BGConstants::new(0.0, 0.0, DenseVector::zeros(dim))?,
            lipschitz,
        })
    }

    fn apply(&self, z: &DenseVector) -> DenseVector {
        let mut out = self.offset.clone();
        for (i, row) in self.rows.iter().enumerate() {
            let v = out.get(i) + row.dot(z);
            out.set(i, v);
        }
        out
    }
}

impl OperatorOracle for AffineOperator {
    fn dimension(&self) -> usize {
        self.offset.dim()
    }
    fn sample_at(&self, point: &DenseVector, _scenario: u64) -> Result<DenseVector> {
        if point.dim() != self.dimension() {
            return Err(Error::DimensionMismatch {
                expected: self.dimension(),
                got: point.dim(),
            });
        }
        Ok(self.apply(point))
    }
    fn mean_operator(&self, point: &DenseVector) -> Option<DenseVector> {
        Some(self.apply(point))
    }
    fn bg(&self) -> &BGConstants {
        &self.bg
    }
    fn lipschitz(&self) -> f64 {
        self.lipschitz
    }
}

/// Stacks the saddle jacobian [[0, M], [-M^T, 0]] for x, y blocks of equal
/// dimension.
fn saddle_jacobian(m: &[Vec<f64>]) -> Vec<Vec<f64>> {
    let n = m.len();
    let dim = 2 * n;
    let mut j = vec![vec![0.0; dim]; dim];
    for r in 0..n {
        for c in 0..n {
            j[r][n + c] = m[r][c];
            j[n + r][c] = -m[c][r];
        }
    }
    j
}

/// Builds a saddle fixture. `noise_sigma` wraps the field in constant-scale
/// Gaussian noise (shared scenario seed, so the Lipschitz modulus is
/// unaffected); `z0_scale` scales the all-ones start point.
pub fn build_saddle(
    variant: SaddleVariant,
    noise_sigma: f64,
    z0_scale: f64,
) -> Result<ProblemInstance> {
    let (jac, offset, prox_part, reference, name, provenance) = match variant {
        SaddleVariant::Bilinear => {
            let m = vec![vec![0.0, 1.0], vec![-1.0, 0.0]];
            (
                saddle_jacobian(&m),
                DenseVector::zeros(4),
                ProxFunctionSpec::Zero { dim: 4 },
                InclusionReference {
                    z_star: DenseVector::zeros(4),
                    h_star: DenseVector::zeros(4),
                },
                "saddle-bilinear",
                "rotation coupling; F(0) = 0, L = 1 by orthogonality",
            )
        }
        SaddleVariant::L1Bilinear => {
            // Psi = <x, y> + <u, x> - <v, y>, u = (-1, 0.2), v = (0.5, 0),
            // h1 = 0.3 ||x||_1. KKT by hand: x* = v = (0.5, 0),
            // y* = (0.7, 0) with subgradient (1, -2/3).
            let m = vec![vec![1.0, 0.0], vec![0.0, 1.0]];
            let u = [-1.0, 0.2];
            let v = [0.5, 0.0];
            let offset = DenseVector::from(&[u[0], u[1], v[0], v[1]][..]);
            let lambda = 0.3;
            let prox_part = ProxFunctionSpec::SeparableProduct(vec![
                ProxFunctionSpec::L1 {
                    weight: lambda,
                    dim: 2,
                },
                ProxFunctionSpec::Zero { dim: 2 },
            ]);
            (
                saddle_jacobian(&m),
                offset,
                prox_part,
                InclusionReference {
                    z_star: DenseVector::from(&[0.5, 0.0, 0.7, 0.0][..]),
                    h_star: DenseVector::from(&[lambda, lambda * (-2.0 / 3.0), 0.0, 0.0][..]),
                },
                "saddle-l1-bilinear",
                "hand KKT with the l1 subdifferential box; x*_2 = 0 is interior to the box",
            )
        }
        SaddleVariant::NonnegBilinear => {
            // Psi = <x, y> + <u, x> - <v, y> on the nonnegative orthants,
            // u = (0.5, -0.4), v = (0.3, 0.2): z* = ((0, 0.2), (0, 0.4)).
            let m = vec![vec![1.0, 0.0], vec![0.0, 1.0]];
            let u = [0.5, -0.4];
            let v = [0.3, 0.2];
            let offset = DenseVector::from(&[u[0], u[1], v[0], v[1]][..]);
            let prox_part = ProxFunctionSpec::SetIndicator(ConvexSetSpec::NonnegativeOrthant {
                dim: 4,
            });
            (
                saddle_jacobian(&m),
                offset,
                prox_part,
                InclusionReference {
                    z_star: DenseVector::from(&[0.0, 0.2, 0.0, 0.4][..]),
                    h_star: DenseVector::from(&[-0.5, 0.0, -0.3, 0.0][..]),
                },
                "saddle-nonneg-bilinear",
                "hand KKT on the box LP dual pair; normal-cone elements at the active coords",
            )
        }
    };

    let operator = AffineOperator::new(jac, offset)?;
    let operator: Arc<dyn OperatorOracle> = if noise_sigma > 0.0 {
        Arc::new(make_additive_noise_wrapper_operator(
            operator,
            NoiseScale::Constant(noise_sigma),
        ))
    } else {
        Arc::new(operator)
    };

    let problem = InclusionProblem {
        name: name.into(),
        z0: DenseVector::constant(4, z0_scale)?,
        operator,
        prox_part,
        reference: Some(reference),
        provenance: provenance.into(),
    };
    problem.check_reference()?;
    Ok(ProblemInstance::Inclusion(problem))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn unwrap_inclusion(p: ProblemInstance) -> InclusionProblem {
        match p {
            ProblemInstance::Inclusion(i) => i,
            _ => panic!("wrong kind"),
        }
    }

    #[test]
    fn all_variants_pass_certificates() {
        for v in [
            SaddleVariant::Bilinear,
            SaddleVariant::L1Bilinear,
            SaddleVariant::NonnegBilinear,
        ] {
            let p = unwrap_inclusion(build_saddle(v, 0.0, 1.0).unwrap());
            p.check_reference().unwrap();
        }
    }

    #[test]
    fn rotation_block_has_unit_modulus() {
        let p = unwrap_inclusion(build_saddle(SaddleVariant::Bilinear, 0.0, 1.0).unwrap());
        assert!((p.operator.lipschitz() - 1.0).abs() < 1e-12);
        assert!(p
            .operator
            .mean_operator(&DenseVector::zeros(4))
            .unwrap()
            .norm()
            .abs()
            < 1e-15);
    }

    #[test]
    fn l1_reference_has_a_zero_coordinate() {
        let p = unwrap_inclusion(build_saddle(SaddleVariant::L1Bilinear, 0.0, 1.0).unwrap());
        let z_star = &p.reference.as_ref().unwrap().z_star;
        assert_eq!(z_star.get(1), 0.0);
        assert!((p.operator.lipschitz() - 1.0).abs() < 1e-12);
    }

    #[test]
    fn noise_leaves_lipschitz_and_mean_alone() {
        let p = unwrap_inclusion(build_saddle(SaddleVariant::Bilinear, 0.5, 1.0).unwrap());
        assert!((p.operator.lipschitz() - 1.0).abs() < 1e-12);
        // B stays 0 for constant-scale noise; G^2 = sigma^2 * dim = 1
        assert_eq!(p.operator.bg().b, 0.0);
        assert!((p.operator.bg().g - 1.0).abs() < 1e-12);
        // F(z) = (M y, -M^T x) with the rotation M: at z = (1, -1, 0.5, 0)
        // this is ((y2, -y1), (x2, -x1)) = (0, -0.5, -1, -1)
        let z = DenseVector::from(&[1.0, -1.0, 0.5, 0.0][..]);
        let mean = p.operator.mean_operator(&z).unwrap();
        assert!(mean.dist(&DenseVector::from(&[0.0, -0.5, -1.0, -1.0][..])) < 1e-14);
    }

    #[test]
    fn z0_scale_applies() {
        let p = unwrap_inclusion(build_saddle(SaddleVariant::Bilinear, 0.0, 0.05).unwrap());
        assert!(p.z0.dist(&DenseVector::constant(4, 0.05).unwrap()) < 1e-15);
    }
}
