use thiserror::Error;

/// Errors surfaced by the numerical core.
#[derive(Debug, Error)]
pub enum Error {
    /// Bad configuration or violated precondition (maps to CLI exit 1).
    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    /// Evaluation outside the valid domain of an operation (CLI exit 1).
    #[error("domain error: {0}")]
    Domain(String),

    /// Iterative solver did not reach its tolerance (CLI exit 2).
    #[error("solver failed after {iterations} iterations, residual {residual:.3e}")]
    SolverFailure { residual: f64, iterations: usize },

    /// Time step too large or energy increased beyond tolerance (CLI exit 3).
    #[error("instability: {0}")]
    Instability(String),

    /// Non-finite values detected during a flow (CLI exit 3).
    #[error("divergence: {0}")]
    Divergence(String),
}

pub type Result<T> = std::result::Result<T, Error>;
