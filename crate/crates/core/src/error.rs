//! Error type shared by all modules.

use thiserror::Error;

/// Errors produced by the numerical core and the harness.
#[derive(Debug, Error)]
pub enum Error {
    #[error("dimension mismatch: expected {expected}, got {got}")]
    DimensionMismatch { expected: usize, got: usize },

    #[error("matrix is not positive definite: eigenvalue {eigenvalue:e} at or below floor {floor:e}")]
    NotPositiveDefinite { eigenvalue: f64, floor: f64 },

    #[error("symmetric eigensolver failed to converge on eigenvalue {index} after {iterations} iterations")]
    EigenConvergence { index: usize, iterations: usize },

    #[error("linear system is ill-conditioned: Cholesky failed at final jitter {final_jitter:e}")]
    IllConditioned { final_jitter: f64 },

    #[error("singular configuration: anchor {index} lies at the cut locus of the evaluation point")]
    CutLocus { index: usize },

    #[error("degenerate step: {0}")]
    DegenerateStep(&'static str),

    #[error("non-finite value in {0}")]
    NonFinite(&'static str),

    #[error("invalid {what}: {reason}")]
    Invalid { what: &'static str, reason: String },

    #[error("i/o error: {0}")]
    Io(#[from] std::io::Error),

    #[error("serialization error: {0}")]
    Json(#[from] serde_json::Error),
}

impl Error {
    pub fn invalid(what: &'static str, reason: impl Into<String>) -> Self {
        Error::Invalid {
            what,
            reason: reason.into(),
        }
    }

    /// Whether this error is a numerical failure (as opposed to a
    /// configuration or usage error). Drives the CLI exit code.
    pub fn is_numerical(&self) -> bool {
        matches!(
            self,
            Error::NotPositiveDefinite { .. }
                | Error::EigenConvergence { .. }
                | Error::IllConditioned { .. }
                | Error::CutLocus { .. }
                | Error::DegenerateStep(_)
                | Error::NonFinite(_)
        )
    }
}

pub type Result<T> = std::result::Result<T, Error>;
