use thiserror::Error;

/// Errors produced by the library.
#[derive(Debug, Error)]
pub enum Error {
    /// An argument lies outside the mathematical domain of an operation.
    #[error("domain error: {0}")]
    Domain(String),

    /// An argument lies outside the range for which an evaluator is validated.
    #[error("range error: {0}")]
    Range(String),

    /// An iterative method or adaptive quadrature missed its tolerance.
    #[error("convergence failure: {0}")]
    Convergence(String),

    /// No parameter choice under the configured caps meets the tolerance.
    #[error("infeasible tolerance {eps:e}: {reason}")]
    Infeasible { eps: f64, reason: String },

    /// Newton iteration failed during a time step.
    #[error("Newton iteration failed at step {step} after {iterations} iterations (residuals: {trace:?})")]
    StepFailure {
        step: usize,
        iterations: usize,
        trace: Vec<f64>,
    },

    /// Malformed exponential-sum table or other textual input.
    #[error("parse error: {0}")]
    Parse(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),
}

pub type Result<T> = std::result::Result<T, Error>;

pub(crate) fn domain(msg: impl Into<String>) -> Error {
    Error::Domain(msg.into())
}
