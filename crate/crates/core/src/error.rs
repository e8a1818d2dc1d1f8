use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("shape error: {0}")]
    Shape(String),
    #[error("field error: {0}")]
    Field(String),
    #[error("zero subspace: input vectors span only the zero vector")]
    ZeroSubspace,
    #[error("dimension error: {0}")]
    Dimension(String),
    #[error("graph is not regular: {0}")]
    Regularity(String),
    #[error("size limit exceeded: {0}")]
    SizeLimit(String),
    #[error("unsupported: {0}")]
    Unsupported(String),
    #[error("validation failed: {0}")]
    Validation(String),
    #[error("invalid configuration: {0}")]
    Config(String),
    #[error("sampling failed: {0}")]
    Sampling(String),
    #[error("parse error: {0}")]
    Parse(String),
    #[error("internal error: {0}")]
    Internal(String),
}

pub type Result<T> = std::result::Result<T, Error>;
