//! Error type shared across the library.

use thiserror::Error;

/// Library-wide error type.
#[derive(Debug, Error)]
pub enum Error {
    /// A vector or operator was used with an incompatible dimension.
    #[error("dimension mismatch: expected {expected}, got {got}")]
    DimensionMismatch { expected: usize, got: usize },

    /// An operation precondition was violated (bad beta, nonpositive scale, ...).
    #[error("contract violation: {0}")]
    ContractViolation(String),

    /// Invalid solver or experiment configuration.
    #[error("configuration error: {0}")]
    Config(String),

    /// A problem or oracle could not be constructed from the given data.
    #[error("construction error: {0}")]
    Construction(String),

    /// A NaN or infinity appeared mid-run; the run is aborted.
    #[error("non-finite value in {what} at iteration {k}")]
    NonFinite { what: String, k: usize },

    /// A custom schedule violated the step-size admissibility condition.
    #[error(
        "schedule admissibility violated at k={k}: beta={beta}, tau={tau} exceeds bound {bound}"
    )]
    ScheduleAdmissibility {
        k: usize,
        beta: f64,
        tau: f64,
        bound: f64,
    },
}

pub type Result<T> = std::result::Result<T, Error>;

impl Error {
    pub(crate) fn contract(msg: impl Into<String>) -> Self {
        Error::ContractViolation(msg.into())
    }

    pub(crate) fn config(msg: impl Into<String>) -> Self {
        Error::Config(msg.into())
    }

    pub(crate) fn construction(msg: impl Into<String>) -> Self {
        Error::Construction(msg.into())
    }
}
