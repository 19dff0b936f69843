use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    /// An argument lies outside the domain of the operation.
    #[error("domain error: {0}")]
    Domain(String),
    #[error("shape error: {0}")]
    Shape(String),
    #[error("matrix is singular")]
    Singular,
    /// A resource guard (enumeration size, node budget) was hit.
    #[error("size limit exceeded: {0}")]
    Size(String),
    /// A floating-point decision could not be resolved soundly.
    #[error("precision error: {0}")]
    Precision(String),
    #[error("invalid input: {0}")]
    InvalidInput(String),
    #[error("parse error: {0}")]
    Parse(String),
    /// An exactly checked identity failed where the theory says it cannot.
    #[error("internal error: {0}")]
    Internal(String),
}
