use thiserror::Error;

use crate::bn::VarId;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("variable {var} has cardinality {left} in one factor and {right} in another")]
    CardinalityMismatch { var: VarId, left: usize, right: usize },

    #[error("variable {0} is not in the factor scope")]
    NotInScope(VarId),

    #[error("unknown variable id {0}")]
    UnknownVariable(VarId),

    #[error("value {value} out of range for variable {var} with cardinality {cardinality}")]
    ValueOutOfRange {
        var: VarId,
        value: usize,
        cardinality: usize,
    },

    #[error("factor table has {got} entries, scope requires {expected}")]
    TableSize { expected: usize, got: usize },

    #[error("dimension mismatch: expected {expected}, got {got}")]
    DimensionMismatch { expected: usize, got: usize },

    #[error("evidence has zero probability")]
    ZeroProbabilityEvidence,

    #[error("queried event has zero probability given the evidence (log-likelihood is -inf)")]
    ZeroLikelihood,

    #[error("query variable {0} is also observed as evidence")]
    QueryInEvidence(VarId),

    #[error("{what} of size {size} exceeds the cap of {cap}")]
    CapExceeded { what: &'static str, size: u128, cap: u128 },

    #[error("invalid distribution: {0}")]
    InvalidDistribution(String),

    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("infeasible: {0}")]
    Infeasible(String),

    #[error("invalid network: {}", .0.join("; "))]
    InvalidNetwork(Vec<String>),

    #[error("iteration limit reached: {0}")]
    IterationLimit(String),

    #[error("unsupported: {0}")]
    Unsupported(String),
}
