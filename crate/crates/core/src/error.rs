use alloc::string::String;

/// Errors raised by the laboratory.
#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum Error {
    #[error("invalid parameter: {0}")]
    InvalidParameter(String),
    #[error("dimension mismatch: expected {expected}, got {found}")]
    DimensionMismatch { expected: usize, found: usize },
    #[error("dilatation {theta} outside tabulated range [{lo}, {hi}]")]
    OutOfRange { theta: f64, lo: f64, hi: f64 },
    #[error("precondition violated: {0}")]
    Precondition(String),
    #[error("{solver} did not converge after {iterations} iterations (residual {residual:e})")]
    NoConvergence {
        solver: &'static str,
        iterations: usize,
        residual: f64,
    },
    #[error("quadrature failed: {0}")]
    Quadrature(String),
    #[error("solver failed: {0}")]
    Solver(String),
}

pub type Result<T> = core::result::Result<T, Error>;

pub(crate) fn invalid(msg: impl Into<String>) -> Error {
    Error::InvalidParameter(msg.into())
}

pub(crate) fn precondition(msg: impl Into<String>) -> Error {
    Error::Precondition(msg.into())
}
