use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum Error {
    #[error("mixed ring modes: {0}")]
    Mode(String),
    #[error("unsupported ring: {0}")]
    UnsupportedRing(String),
    #[error("domain error: {0}")]
    Domain(String),
    #[error("element does not belong to this algebra")]
    Ownership,
    #[error("non-integral structure constant: {0}")]
    Integrality(String),
    #[error("integer overflow in exact arithmetic: {0}")]
    Overflow(String),
    #[error("parse error at line {line}, column {column}: {message}")]
    Parse {
        line: usize,
        column: usize,
        message: String,
    },
    #[error("rejected: {0}")]
    Rejected(String),
}
