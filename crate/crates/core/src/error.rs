use thiserror::Error;

/// Errors raised across the crate.
#[derive(Debug, Error)]
pub enum Error {
    #[error("dimension mismatch: {0}")]
    DimensionMismatch(String),

    #[error("matrix is not Hermitian (deviation {deviation:.3e})")]
    NotHermitian { deviation: f64 },

    #[error("matrix is not positive semidefinite (smallest eigenvalue {min_eigenvalue:.3e})")]
    NotPositive { min_eigenvalue: f64 },

    #[error("trace is {trace:.12}, expected 1")]
    TraceNotOne { trace: f64 },

    #[error("non-finite matrix entry at ({row}, {col})")]
    NonFinite { row: usize, col: usize },

    #[error("value out of range: {0}")]
    OutOfRange(String),

    #[error("negative entry {0:.3e} in probability vector")]
    NegativeEntry(f64),

    #[error("Kraus operators are not complete (deviation {deviation:.3e})")]
    Incomplete { deviation: f64 },

    #[error("state is not incoherent (off-diagonal mass {off_diagonal:.3e})")]
    NotIncoherent { off_diagonal: f64 },

    #[error("structural mismatch: {0}")]
    Structure(String),

    #[error("majorization gate refused: {0}")]
    GateRefused(String),

    #[error("{what} did not converge within {iterations} iterations (best value {best})")]
    NotConverged {
        what: &'static str,
        iterations: usize,
        best: f64,
    },

    #[error("parse error: {0}")]
    Parse(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),
}

impl From<serde_json::Error> for Error {
    fn from(e: serde_json::Error) -> Self {
        Error::Parse(e.to_string())
    }
}

pub type Result<T, E = Error> = std::result::Result<T, E>;
