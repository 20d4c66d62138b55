use thiserror::Error;

/// Errors raised by the library. The CLI maps each variant onto an exit code.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    /// Malformed or out-of-contract input (shape mismatch, NaN, x <= 0, ...).
    #[error("invalid input: {0}")]
    Validation(String),

    /// The form is deterministic (a = b = 0), so no tail exponent exists.
    #[error("degenerate form: {0}")]
    Degenerate(String),

    /// An argument lies outside the domain where the expression is finite.
    #[error("domain error: {what} at y = {y}")]
    Domain { what: String, y: f64 },

    /// The Jacobi sweep budget ran out before the off-diagonal mass vanished.
    #[error("eigensolver did not converge after {sweeps} sweeps (off-diagonal residual {residual:e})")]
    NoConvergence { sweeps: usize, residual: f64 },

    /// Quadrature failed to reach its accuracy target.
    #[error("numerical integration failed: {reason} (estimated error {achieved:e})")]
    Quadrature { reason: String, achieved: f64 },
}

pub type Result<T> = std::result::Result<T, Error>;

pub(crate) fn validation(msg: impl Into<String>) -> Error {
    Error::Validation(msg.into())
}
