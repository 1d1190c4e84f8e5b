use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum Error {
    #[error("parse error: {0}")]
    Parse(String),
    #[error("invalid input: {0}")]
    Invalid(String),
    #[error("cannot normalize a boundary")]
    CannotNormalize,
    #[error("out of bound: {0}")]
    Bound(String),
    #[error("space mismatch: {0}")]
    Mismatch(String),
    #[error("mathematical defect: {0}")]
    Defect(String),
}

pub type Result<T> = std::result::Result<T, Error>;
