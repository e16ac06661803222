//! Error type shared by every module of the crate.

use thiserror::Error;

#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid argument: {0}")]
    InvalidArgument(String),
    #[error("mesh topology error: {0}")]
    Topology(String),
    #[error("unsupported polynomial degree {degree} (maximum {max})")]
    UnsupportedDegree { degree: usize, max: usize },
    #[error("invalid problem data: {0}")]
    Data(String),
    #[error("space mismatch: {0}")]
    SpaceMismatch(String),
    #[error("singular linear system: {0}")]
    Singular(String),
    #[error("linear solver failed to converge: {0}")]
    LinearSolver(String),
    #[error("parse error: {0}")]
    Parse(String),
    #[error(transparent)]
    Io(#[from] std::io::Error),
}

pub type Result<T> = std::result::Result<T, Error>;
