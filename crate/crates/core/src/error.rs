//! Error type shared across the crate.

use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Clone, Error)]
pub enum Error {
    #[error("invalid group: {0}")]
    InvalidGroup(String),

    #[error("shape mismatch: expected {expected} coordinates, got {got}")]
    ShapeMismatch { expected: usize, got: usize },

    #[error("operation requires a group of odd order")]
    EvenOrder,

    #[error("matrix size mismatch: expected {expected}x{expected}, got {rows}x{cols}")]
    SizeMismatch {
        expected: usize,
        rows: usize,
        cols: usize,
    },

    #[error("table is not a bijection of the phase space")]
    NotBijective,

    #[error("table is not additive at the pair of indices ({k}, {l})")]
    NotAdditive { k: usize, l: usize },

    #[error("phase constraint violated at pair ({k}, {l}): lhs {lhs}, rhs {rhs}")]
    ConstraintViolation {
        k: usize,
        l: usize,
        lhs: String,
        rhs: String,
    },

    #[error("no phase lift exists with denominator up to {max_denominator}")]
    NoLift { max_denominator: i64 },

    #[error("closure exceeded the size bound {bound}")]
    ClosureBound { bound: usize },

    #[error("intertwiner construction failed: {0}")]
    Intertwiner(String),

    #[error("expected a scalar operator: {0}")]
    NonScalar(String),

    #[error("consistency check failed: {0}")]
    Disagreement(String),

    #[error("invalid argument: {0}")]
    InvalidArgument(String),
}
