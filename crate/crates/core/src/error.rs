use thiserror::Error;

/// Errors raised by the decoders, operators and experiment harness.
#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("unsupported: {0}")]
    Unsupported(String),

    #[error("{routine} did not converge after {iterations} iterations (last residual {residual:.3e})")]
    ConvergenceFailure {
        routine: &'static str,
        iterations: usize,
        residual: f64,
    },

    #[error("numeric failure: {0}")]
    NumericFailure(String),

    #[error("generation failure: {0}")]
    GenerationFailure(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

pub type Result<T> = std::result::Result<T, Error>;

pub(crate) fn invalid<T>(msg: impl Into<String>) -> Result<T> {
    Err(Error::InvalidArgument(msg.into()))
}
