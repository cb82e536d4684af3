//! Dense vectors and the anchored combination used by every solver.
//!
//! All solver state lives in [`DenseVector`]: a fixed-dimension vector of
//! finite `f64` entries. Construction rejects NaN and infinities; arithmetic
//! helpers keep dimensions in sync with debug assertions (solvers check
//! finiteness explicitly at step boundaries, where a failure maps to a
//! run abort rather than a panic).

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// A dense vector in R^d with finite entries.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DenseVector(Vec<f64>);

impl DenseVector {
    /// Builds a vector, rejecting non-finite entries.
    pub fn new(entries: Vec<f64>) -> Result<Self> {
        if let Some(bad) = entries.iter().find(|v| !v.is_finite()) {
            return Err(Error::contract(format!("non-finite entry {bad}")));
        }
        Ok(DenseVector(entries))
    }

    pub fn zeros(dim: usize) -> Self {
        DenseVector(vec![0.0; dim])
    }

    /// All-ones vector scaled by `value`.
    pub fn constant(dim: usize, value: f64) -> Result<Self> {
        Self::new(vec![value; dim])
    }

    pub fn dim(&self) -> usize {
        self.0.len()
    }

    pub fn as_slice(&self) -> &[f64] {
        &self.0
    }

    pub fn into_vec(self) -> Vec<f64> {
        self.0
    }

    pub fn is_finite(&self) -> bool {
        self.0.iter().all(|v| v.is_finite())
    }

    pub fn get(&self, i: usize) -> f64 {
        self.0[i]
    }

    pub(crate) fn set(&mut self, i: usize, v: f64) {
        self.0[i] = v;
    }

    pub fn dot(&self, other: &DenseVector) -> f64 {
        debug_assert_eq!(self.dim(), other.dim());
        self.0.iter().zip(&other.0).map(|(a, b)| a * b).sum()
    }

    pub fn norm_sq(&self) -> f64 {
        self.dot(self)
    }

    pub fn norm(&self) -> f64 {
        self.norm_sq().sqrt()
    }

    pub fn dist(&self, other: &DenseVector) -> f64 {
        self.dist_sq(other).sqrt()
    }

    pub fn dist_sq(&self, other: &DenseVector) -> f64 {
        debug_assert_eq!(self.dim(), other.dim());
        self.0
            .iter()
            .zip(&other.0)
            .map(|(a, b)| (a - b) * (a - b))
            .sum()
    }

    pub fn add(&self, other: &DenseVector) -> DenseVector {
        debug_assert_eq!(self.dim(), other.dim());
        DenseVector(self.0.iter().zip(&other.0).map(|(a, b)| a + b).collect())
    }

    pub fn sub(&self, other: &DenseVector) -> DenseVector {
        debug_assert_eq!(self.dim(), other.dim());
        DenseVector(self.0.iter().zip(&other.0).map(|(a, b)| a - b).collect())
    }

    pub fn scale(&self, s: f64) -> DenseVector {
        DenseVector(self.0.iter().map(|a| a * s).collect())
    }

    /// `self + s * other`, the workhorse of every iteration.
    pub fn axpy(&self, s: f64, other: &DenseVector) -> DenseVector {
        debug_assert_eq!(self.dim(), other.dim());
        DenseVector(
            self.0
                .iter()
                .zip(&other.0)
                .map(|(a, b)| a + s * b)
                .collect(),
        )
    }

    /// In-place `self += s * other`; used by streaming accumulators.
    pub fn axpy_mut(&mut self, s: f64, other: &DenseVector) {
        debug_assert_eq!(self.dim(), other.dim());
        for (a, b) in self.0.iter_mut().zip(&other.0) {
            *a += s * b;
        }
    }

    /// Concatenates two vectors (used for primal-dual stacking).
    pub fn concat(&self, other: &DenseVector) -> DenseVector {
        let mut v = self.0.clone();
        v.extend_from_slice(&other.0);
        DenseVector(v)
    }

    pub(crate) fn from_raw(entries: Vec<f64>) -> Self {
        DenseVector(entries)
    }
}

impl From<&[f64]> for DenseVector {
    fn from(s: &[f64]) -> Self {
        DenseVector(s.to_vec())
    }
}

/// A stacked primal-dual point z = (x, y) with a recorded split index.
#[derive(Debug, Clone, PartialEq)]
pub struct PrimalDualPoint {
    data: DenseVector,
    split: usize,
}

impl PrimalDualPoint {
    pub fn new(x: &DenseVector, y: &DenseVector) -> Self {
        PrimalDualPoint {
            split: x.dim(),
            data: x.concat(y),
        }
    }

    /// Wraps an already-stacked vector; `split` is the primal dimension.
    pub fn from_stacked(data: DenseVector, split: usize) -> Result<Self> {
        if split > data.dim() {
            return Err(Error::DimensionMismatch {
                expected: data.dim(),
                got: split,
            });
        }
        Ok(PrimalDualPoint { data, split })
    }

    pub fn stacked(&self) -> &DenseVector {
        &self.data
    }

    pub fn split(&self) -> usize {
        self.split
    }

    pub fn x(&self) -> DenseVector {
        DenseVector(self.data.as_slice()[..self.split].to_vec())
    }

    pub fn y(&self) -> DenseVector {
        DenseVector(self.data.as_slice()[self.split..].to_vec())
    }
}

/// Computes `beta * anchor + (1 - beta) * current` with beta in (0, 1).
pub fn anchored_combination(
    beta: f64,
    anchor: &DenseVector,
    current: &DenseVector,
) -> Result<DenseVector> {
    if !(beta > 0.0 && beta < 1.0) {
        return Err(Error::contract(format!("beta {beta} outside (0, 1)")));
    }
    if anchor.dim() != current.dim() {
        return Err(Error::DimensionMismatch {
            expected: anchor.dim(),
            got: current.dim(),
        });
    }
    Ok(anchor_blend(beta, anchor, current))
}

/// Unchecked blend used inside solver steps, where beta = 1 is a legal
/// degenerate case (pure anchor).
pub(crate) fn anchor_blend(beta: f64, anchor: &DenseVector, current: &DenseVector) -> DenseVector {
    anchor.scale(beta).axpy(1.0 - beta, current)
}
