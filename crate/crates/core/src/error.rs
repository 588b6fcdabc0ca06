use thiserror::Error;

/// Errors raised by the laboratory's numerical routines.
#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    /// An input lies outside the domain of the operation (zero vector, r <= r_s, ...).
    #[error("domain error: {0}")]
    Domain(String),
    /// Integration produced a non-finite state.
    #[error("numerical failure at step {step}: {reason}")]
    Numerical { step: usize, reason: String },
    /// A configuration, grid or resolution failed validation.
    #[error("validation error: {0}")]
    Validation(String),
    /// Least-squares fit could not be formed.
    #[error("fit error: {0}")]
    Fit(String),
}

pub type Result<T> = std::result::Result<T, Error>;

pub(crate) fn domain(msg: impl Into<String>) -> Error {
    Error::Domain(msg.into())
}

pub(crate) fn validation(msg: impl Into<String>) -> Error {
    Error::Validation(msg.into())
}
