use thiserror::Error;

/// Errors raised by the toolkit.
///
/// Infeasibility of a certificate search is not an error: the search
/// functions return `Ok(None)` (or a status enum) in that case. Errors are
/// reserved for violated preconditions and numerical breakdown.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("dimension mismatch: {0}")]
    DimensionMismatch(String),

    #[error("matrix is not square ({rows}x{cols})")]
    NotSquare { rows: usize, cols: usize },

    #[error("matrix is not Metzler: entry ({row},{col}) = {value}")]
    NotMetzler { row: usize, col: usize, value: f64 },

    #[error("matrix has a negative entry: ({row},{col}) = {value}")]
    NegativeEntry { row: usize, col: usize, value: f64 },

    #[error("matrix is not symmetric (max asymmetry {0:e})")]
    NotSymmetric(f64),

    #[error("matrix is singular")]
    Singular,

    #[error("non-finite value in {0}")]
    NonFinite(String),

    #[error("{what} did not converge after {iterations} iterations")]
    NoConvergence { what: &'static str, iterations: usize },

    #[error("system is not stable: {0}")]
    Unstable(String),

    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("structural hypothesis violated: {0}")]
    Hypothesis(String),

    #[error("matrix is not negative semidefinite (largest eigenvalue {0:e})")]
    NotNegativeSemidefinite(f64),

    #[error("problem is infeasible: {0}")]
    Infeasible(String),

    #[error("problem is unbounded: {0}")]
    Unbounded(String),

    #[error("model file: {0}")]
    Model(String),
}

pub type Result<T> = std::result::Result<T, Error>;
