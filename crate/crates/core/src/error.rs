use alloc::string::String;

use num_bigint::BigUint;

use crate::pipeline::Rejection;

pub type Result<T, E = Error> = core::result::Result<T, E>;

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum Error {
    #[error("invalid input: {0}")]
    InvalidInput(String),

    #[error("configuration error: {0}")]
    Config(String),

    #[error("dimension mismatch: expected {expected}, got {got}")]
    DimensionMismatch { expected: usize, got: usize },

    #[error("degenerate basis: Gram-Schmidt vector {index} has squared norm {norm_sq:e}")]
    DegenerateBasis { index: usize, norm_sq: f64 },

    #[error("infeasible configuration: {0}")]
    Infeasible(String),

    #[error("integer overflow in {0}")]
    Overflow(&'static str),

    #[error("N rejected: {reason}")]
    Precondition {
        reason: Rejection,
        factor: Option<BigUint>,
    },

    #[error("invariant violated: {0}")]
    Invariant(String),
}
