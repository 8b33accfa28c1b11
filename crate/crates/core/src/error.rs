use thiserror::Error;

/// Errors surfaced by the verification engine.
#[derive(Debug, Error)]
pub enum Error {
    #[error("weight vectors must have matching lengths: {left} vs {right}")]
    LengthMismatch { left: usize, right: usize },

    #[error("zero-sum sign vectors require an even length, got {len}")]
    OddLength { len: usize },

    #[error("{what} = {value} exceeds the exact-enumeration cap {cap}; use Monte-Carlo mode")]
    CapacityExceeded { what: &'static str, value: u64, cap: u64 },

    #[error("the constraint is infeasible: {0}")]
    ConstraintInfeasible(String),

    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("parse error: {0}")]
    Parse(String),
}

pub type Result<T> = std::result::Result<T, Error>;
