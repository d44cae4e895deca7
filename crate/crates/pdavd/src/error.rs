use thiserror::Error;

/// Crate-wide error type.
#[derive(Debug, Error)]
pub enum Error {
    #[error("dimension mismatch in {context}: expected {expected}, got {actual}")]
    DimensionMismatch {
        context: &'static str,
        expected: usize,
        actual: usize,
    },

    #[error("invalid parameter `{name}`: {message}")]
    InvalidParameter { name: &'static str, message: String },

    /// A solver-parameter inequality failed; the message names the bound.
    #[error("assumption violated: {0}")]
    AssumptionViolated(String),

    #[error("no saddle point: {0}")]
    NoSaddlePoint(String),

    #[error("oracle failed: residual {residual:.3e} after {iterations} iterations")]
    OracleFailed { residual: f64, iterations: usize },

    #[error("step size underflow at t = {t:.6e} (h = {h:.3e}); system too stiff for the requested tolerances")]
    StepSizeUnderflow { t: f64, h: f64 },

    #[error("trajectory diverged: non-finite state at t = {t:.6e}")]
    Divergence { t: f64 },

    #[error("too few samples: need at least {needed}, got {got}")]
    TooFewSamples { needed: usize, got: usize },

    #[error("invalid domain: {0}")]
    InvalidDomain(String),
}

pub type Result<T> = std::result::Result<T, Error>;
