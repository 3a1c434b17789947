use thiserror::Error;

/// Errors shared across the numerical modules.
#[derive(Debug, Error)]
pub enum Error {
    #[error("dimension mismatch: {context} (expected {expected}, got {got})")]
    DimensionMismatch {
        context: &'static str,
        expected: usize,
        got: usize,
    },

    #[error("empty point list")]
    EmptyPointSet,

    #[error("non-finite entry in {0}")]
    NonFinite(&'static str),

    #[error("matrix is not symmetric: {0}")]
    NonSymmetric(&'static str),

    #[error("rank-deficient matrix: {0}")]
    RankDeficient(&'static str),

    #[error("invalid problem: {0}")]
    InvalidProblem(String),

    #[error("subset family too large: r = {r} exceeds the guard limit {limit}")]
    GuardLimitExceeded { r: usize, limit: usize },

    #[error("enumeration bound exceeded: {0}")]
    EnumerationBound(String),

    #[error("the intersection of admissible hulls is empty: {0}")]
    EmptyIntersection(String),

    #[error("solver hit the iteration limit: {0}")]
    MaxIterations(String),

    #[error("numerical failure: {0}")]
    NumericalFailure(String),

    #[error("invalid configuration: {0}")]
    InvalidConfig(String),
}

pub type Result<T> = std::result::Result<T, Error>;
