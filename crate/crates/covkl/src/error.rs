//! Crate-wide error type.

use thiserror::Error;

/// Errors produced by any covkl operation.
#[derive(Debug, Error)]
pub enum Error {
    /// Matrix or vector dimensions do not agree.
    #[error("dimension mismatch: expected {expected}, got {actual}")]
    DimensionMismatch {
        /// Expected dimension
        expected: usize,
        /// Actual dimension
        actual: usize,
    },

    /// Input matrix is not symmetric positive definite.
    ///
    /// The SPD gate requires the smallest eigenvalue to exceed
    /// `1e-12` times the largest; inputs below that are rejected
    /// rather than regularized.
    #[error("matrix is not positive definite: min eigenvalue {min_eig:.3e}, max {max_eig:.3e}")]
    NotPositiveDefinite {
        /// Smallest eigenvalue found
        min_eig: f64,
        /// Largest eigenvalue found
        max_eig: f64,
    },

    /// A scalar parameter is outside its valid range.
    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    /// Degrees-of-freedom gate violated (expectations need nu > 2,
    /// variances nu > 4).
    #[error("degrees of freedom nu = {nu} outside valid range: {requirement}")]
    DegreesOfFreedom {
        /// Supplied value
        nu: f64,
        /// Human-readable requirement, e.g. "nu > 2"
        requirement: &'static str,
    },

    /// The symmetric eigensolver failed to converge.
    #[error(
        "eigensolver failed to converge after {iterations} iterations \
         (n = {dim}, diag range [{diag_min:.3e}, {diag_max:.3e}], off-diag max {offdiag_max:.3e})"
    )]
    EigenNonConvergence {
        /// Matrix dimension
        dim: usize,
        /// Iteration cap that was exhausted
        iterations: usize,
        /// Smallest diagonal entry of the input
        diag_min: f64,
        /// Largest diagonal entry of the input
        diag_max: f64,
        /// Largest off-diagonal magnitude of the input
        offdiag_max: f64,
    },

    /// An objective or estimate evaluated to NaN or infinity.
    #[error("numerical failure: {0}")]
    NumericalFailure(String),

    /// Experiment configuration is invalid.
    #[error("config error: {0}")]
    Config(String),

    /// File could not be read, written or parsed.
    #[error("i/o error on {path}: {message}")]
    Io {
        /// Offending path
        path: String,
        /// Underlying cause
        message: String,
    },
}

/// Crate-wide result alias.
pub type Result<T> = std::result::Result<T, Error>;

impl Error {
    /// Process exit code for the CLI: 2 for configuration/input errors,
    /// 3 for numerical failures.
    pub fn exit_code(&self) -> i32 {
        match self {
            Error::Config(_) | Error::Io { .. } | Error::InvalidParameter(_) => 2,
            Error::DimensionMismatch { .. }
            | Error::NotPositiveDefinite { .. }
            | Error::DegreesOfFreedom { .. }
            | Error::EigenNonConvergence { .. }
            | Error::NumericalFailure(_) => 3,
        }
    }
}
