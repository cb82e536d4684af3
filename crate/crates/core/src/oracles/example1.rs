//! Column-sampling oracle for quadratics f(x) = (1/2d) <x, Qx> + <c, x>.
//!
//! The draw picks a uniform column index i and returns `Q[:,i] * x_i + c`,
//! which is unbiased for the gradient `(1/d) Q x + c`. Its second moment
//! grows quadratically in ||x||, so it satisfies the (B, G) growth bound
//! while violating gradient/suboptimality-based variance conditions
//! whenever Q is singular.

use rand::Rng;

use crate::error::{Error, Result};
use crate::oracle::{BGConstants, GradientOracle};
use crate::rng::RunRng;
use crate::vector::DenseVector;

/// How to establish positive semidefiniteness of Q at construction.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum PsdCheck {
    /// Check the smallest eigenvalue to a 1e-8 tolerance.
    Eigenvalue,
    /// Accept the matrix as PSD without checking.
    Trusted,
}

/// The column-sampling quadratic oracle.
pub struct Example1Oracle {
    columns: Vec<DenseVector>,
    c: DenseVector,
    bg: BGConstants,
}

impl Example1Oracle {
    pub fn columns(&self) -> &[DenseVector] {
        &self.columns
    }

    pub fn linear_term(&self) -> &DenseVector {
        &self.c
    }
}

/// Builds the oracle from a symmetric PSD matrix given in row-major order.
///
/// Growth constants: B^2 = 4 max_i ||Q[:,i]||^2 and
/// G^2 = 4 max_i ||Q[:,i]||^2 ||anchor||^2 + 2 ||c||^2, which dominate the
/// exact second moment (1/d) sum_i ||Q[:,i] x_i + c||^2 for every x.
pub fn make_example1_oracle(
    q_rows: &[Vec<f64>],
    c: DenseVector,
    anchor: DenseVector,
    psd: PsdCheck,
) -> Result<Example1Oracle> {
    let d = q_rows.len();
    if d == 0 {
        return Err(Error::construction("empty matrix"));
    }
    for row in q_rows {
        if row.len() != d {
            return Err(Error::construction("Q must be square"));
        }
    }
    if c.dim() != d || anchor.dim() != d {
        return Err(Error::DimensionMismatch {
            expected: d,
            got: c.dim(),
        });
    }
    for i in 0..d {
        for j in (i + 1)..d {
            if q_rows[i][j] != q_rows[j][i] {
                return Err(Error::construction(format!(
                    "Q not symmetric at ({i},{j}): {} vs {}",
                    q_rows[i][j], q_rows[j][i]
                )));
            }
        }
    }
    if psd == PsdCheck::Eigenvalue {
        let m = nalgebra::DMatrix::from_fn(d, d, |i, j| q_rows[i][j]);
        let min_eig = m
            .symmetric_eigen()
            .eigenvalues
            .iter()
            .cloned()
            .fold(f64::INFINITY, f64::min);
        if min_eig < -1e-8 {
            return Err(Error::construction(format!(
                "Q not PSD: smallest eigenvalue {min_eig}"
            )));
        }
    }

    // columns of the symmetric matrix
    let columns: Vec<DenseVector> = (0..d)
        .map(|j| DenseVector::from_raw((0..d).map(|i| q_rows[i][j]).collect()))
        .collect();
    let max_col_sq = columns
        .iter()
        .map(|col| col.norm_sq())
        .fold(0.0_f64, f64::max);
    let b2 = 4.0 * max_col_sq;
    let g2 = 4.0 * max_col_sq * anchor.norm_sq() + 2.0 * c.norm_sq();
    let bg = BGConstants::new(b2.sqrt(), g2.sqrt(), anchor)?;
    Ok(Example1Oracle { columns, c, bg })
}

impl GradientOracle for Example1Oracle {
    fn dimension(&self) -> usize {
        self.columns.len()
    }

    fn sample(&self, point: &DenseVector, rng: &mut RunRng) -> Result<DenseVector> {
        if point.dim() != self.dimension() {
            return Err(Error::DimensionMismatch {
                expected: self.dimension(),
                got: point.dim(),
            });
        }
        let i = rng.random_range(0..self.dimension());
        Ok(self.c.axpy(point.get(i), &self.columns[i]))
    }

    fn mean_gradient(&self, point: &DenseVector) -> Option<DenseVector> {
        let d = self.dimension() as f64;
        let mut out = self.c.clone();
        for (i, col) in self.columns.iter().enumerate() {
            out.axpy_mut(point.get(i) / d, col);
        }
        Some(out)
    }

    fn bg(&self) -> &BGConstants {
        &self.bg
    }
}
