use thiserror::Error;

/// Errors raised by the beam GP pipeline.
#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("contract violation: {0}")]
    ContractViolation(String),

    #[error("domain error: {0}")]
    Domain(String),

    #[error("parse error at line {line}: {message}")]
    Parse { line: usize, message: String },

    #[error("configuration error: {0}")]
    Config(String),

    #[error("covariance is numerically singular (jitter reached {jitter:e})")]
    NumericalSingularity { jitter: f64 },

    #[error("invalid chain start: {0}")]
    InvalidStart(String),

    #[error("inference failed: {0}")]
    Inference(String),

    #[error("beam model error: {0}")]
    Model(String),

    #[error("degenerate stiffness posterior: standard deviation is zero")]
    DegeneratePosterior,

    #[error("consistency error: {0}")]
    Consistency(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),
}

pub type Result<T, E = Error> = std::result::Result<T, E>;

impl Error {
    pub(crate) fn parse(line: usize, message: impl Into<String>) -> Self {
        Error::Parse {
            line,
            message: message.into(),
        }
    }
}
