//! Error type shared by every module.

use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid model: {0}")]
    InvalidModel(String),

    #[error("split index {index} outside 1..={max}")]
    InvalidSplit { index: usize, max: usize },

    #[error("operator set contains variable {0} outside the universe")]
    OperatorOutsideUniverse(usize),

    #[error("objective set {0:?} is not non-overflowed for any in-process set")]
    NotNonOverflowed(Vec<usize>),

    #[error("enumeration of {size} entries exceeds the guard of {limit}")]
    TooLarge { size: u128, limit: u128 },

    #[error("degenerate observation at time {0}: zero normalizer")]
    DegenerateObservation(usize),

    #[error("length mismatch: {0} vs {1}")]
    LengthMismatch(usize, usize),

    #[error("unsupported constellation size {0}")]
    UnsupportedConstellation(usize),

    #[error("quadrature did not converge: {0}")]
    Quadrature(String),

    #[error("zero sample at index {0}; phase undefined")]
    ZeroSample(usize),

    #[error("parse error on line {line}: {msg}")]
    Parse { line: usize, msg: String },

    #[error("invalid argument: {0}")]
    InvalidArgument(String),
}
