use thiserror::Error;

/// Errors raised by the coverage library.
#[derive(Debug, Error)]
pub enum CoverError {
    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("point of kind {point} does not belong to a {space} space")]
    SpaceMismatch { space: &'static str, point: &'static str },

    #[error("{op} is not supported on a {space} space")]
    Unsupported { op: &'static str, space: &'static str },

    #[error("seed distribution cannot cover the space: {0}")]
    NotCoverable(String),

    #[error("quadrature did not converge on [{a}, {b}] (estimated error {error:e})")]
    Quadrature { a: f64, b: f64, error: f64 },

    #[error("argument {value} outside the domain of {func}: {reason}")]
    Domain {
        func: &'static str,
        value: f64,
        reason: &'static str,
    },

    #[error("too few conditioning successes: {got} < {needed}")]
    InsufficientSamples { got: usize, needed: usize },

    #[error("failed to parse {what}: {reason}")]
    Parse { what: String, reason: String },

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Csv(#[from] csv::Error),
}

pub type Result<T, E = CoverError> = std::result::Result<T, E>;

pub(crate) fn invalid(msg: impl Into<String>) -> CoverError {
    CoverError::InvalidParameter(msg.into())
}
