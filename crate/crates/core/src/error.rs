use thiserror::Error;

pub type Result<T> = std::result::Result<T, LevyError>;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum LevyError {
    #[error("invalid parameter `{name}`: {reason}")]
    InvalidParameter { name: &'static str, reason: String },

    #[error("invalid measure: {0}")]
    InvalidMeasure(String),

    #[error("dimension mismatch: expected {expected}, got {got}")]
    DimensionMismatch { expected: usize, got: usize },

    #[error("quadrature did not converge: estimate {estimate:e}, achieved error {achieved:e}")]
    Quadrature { estimate: f64, achieved: f64 },

    #[error("divergent integral: {0}")]
    Divergent(String),

    #[error("measure is not in the moment class M^{beta}: {integral} is infinite")]
    NotInMomentClass { beta: f64, integral: &'static str },

    #[error("value {value:e} is outside the range of G (upper bound {upper:e})")]
    OutOfRange { value: f64, upper: f64 },

    #[error("unsupported: {0}")]
    Unsupported(String),

    #[error("root finding failed: {0}")]
    RootFinding(String),

    #[error("parse error at `{path}`: {message}")]
    Parse { path: String, message: String },
}

pub(crate) fn invalid(name: &'static str, reason: impl Into<String>) -> LevyError {
    LevyError::InvalidParameter {
        name,
        reason: reason.into(),
    }
}
