use thiserror::Error;

use crate::functional::RepresentabilityCertificate;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("dimension mismatch: expected {expected}, found {found}")]
    DimensionMismatch { expected: usize, found: usize },

    #[error("invalid group table: {0}")]
    InvalidGroupTable(String),

    #[error("invalid algebra data: {0}")]
    InvalidAlgebra(String),

    #[error("scale factor must be nonnegative, got {0}")]
    NegativeScale(f64),

    #[error("weights must be nonnegative (entry {index} is {value})")]
    NegativeWeight { index: usize, value: f64 },

    #[error("algebra carries no canonical trace")]
    MissingTrace,

    #[error("functional is not representable")]
    NotRepresentable(Box<RepresentabilityCertificate>),

    #[error("representation operator for basis element {index} is not well defined (residual {residual:e})")]
    IllDefinedRepresentation { index: usize, residual: f64 },

    #[error("linear relation consistency failure: {0}")]
    RelationConsistency(String),

    #[error("tolerance must lie in (0, 1e-2), got {0}")]
    InvalidTolerance(f64),
}
