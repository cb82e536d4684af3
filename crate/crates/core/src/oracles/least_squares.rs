//! Row-sampling oracle for f(x) = (1/2m) ||Ax - b||^2.
//!
//! A draw picks a uniform row j and returns `a_j (<a_j, x> - b_j)`, unbiased
//! for the full gradient `(1/m) A^T (Ax - b)`.

use rand::Rng;

use crate::error::{Error, Result};
use crate::oracle::{BGConstants, GradientOracle};
use crate::rng::RunRng;
use crate::vector::DenseVector;

pub struct LeastSquaresRowOracle {
    rows: Vec<DenseVector>,
    rhs: Vec<f64>,
    bg: BGConstants,
}

/// Builds the row oracle with growth constants derived from
/// `(<a_j,x> - b_j)^2 <= 2 ||a_j||^2 ||x||^2 + 2 b_j^2`:
///
/// anchored at 0:  B^2 = 2 max_j ||a_j||^4, G^2 = (2/m) sum_j ||a_j||^2 b_j^2;
/// otherwise the `||x||^2 <= 2||x-x0||^2 + 2||x0||^2` shift doubles B^2 and
/// adds the corresponding offset to G^2.
pub fn make_finite_sum_least_squares_oracle(
    rows: &[Vec<f64>],
    rhs: &[f64],
    anchor: DenseVector,
) -> Result<LeastSquaresRowOracle> {
    let m = rows.len();
    if m == 0 {
        return Err(Error::construction("least squares needs at least one row"));
    }
    if rhs.len() != m {
        return Err(Error::DimensionMismatch {
            expected: m,
            got: rhs.len(),
        });
    }
    let d = rows[0].len();
    for r in rows {
        if r.len() != d {
            return Err(Error::construction("ragged rows in A"));
        }
    }
    if anchor.dim() != d {
        return Err(Error::DimensionMismatch {
            expected: d,
            got: anchor.dim(),
        });
    }
    let rows: Vec<DenseVector> = rows.iter().map(|r| DenseVector::from(&r[..])).collect();
    let max_a4 = rows
        .iter()
        .map(|r| r.norm_sq() * r.norm_sq())
        .fold(0.0_f64, f64::max);
    let mean_ab = rows
        .iter()
        .zip(rhs)
        .map(|(r, b)| r.norm_sq() * b * b)
        .sum::<f64>()
        / m as f64;
    let (b2, g2) = if anchor.norm_sq() == 0.0 {
        (2.0 * max_a4, 2.0 * mean_ab)
    } else {
        (
            4.0 * max_a4,
            4.0 * max_a4 * anchor.norm_sq() + 2.0 * mean_ab,
        )
    };
    let bg = BGConstants::new(b2.sqrt(), g2.sqrt(), anchor)?;
    Ok(LeastSquaresRowOracle {
        rows,
        rhs: rhs.to_vec(),
        bg,
    })
}

impl GradientOracle for LeastSquaresRowOracle {
    fn dimension(&self) -> usize {
        self.rows[0].dim()
    }

    fn sample(&self, point: &DenseVector, rng: &mut RunRng) -> Result<DenseVector> {
        if point.dim() != self.dimension() {
            return Err(Error::DimensionMismatch {
                expected: self.dimension(),
                got: point.dim(),
            });
        }
        let j = rng.random_range(0..self.rows.len());
        let resid = self.rows[j].dot(point) - self.rhs[j];
        Ok(self.rows[j].scale(resid))
    }

    fn mean_gradient(&self, point: &DenseVector) -> Option<DenseVector> {
        let mut out = DenseVector::zeros(self.dimension());
        for (row, b) in self.rows.iter().zip(&self.rhs) {
            out.axpy_mut(row.dot(point) - b, row);
        }
        Some(out.scale(1.0 / self.rows.len() as f64))
    }

    fn bg(&self) -> &BGConstants {
        &self.bg
    }
}
