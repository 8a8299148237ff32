use thiserror::Error;

#[derive(Debug, Clone, Error, PartialEq, Eq)]
pub enum Error {
    #[error("invalid input: {0}")]
    InvalidInput(String),
    #[error("allocation is not complete")]
    IncompleteAllocation,
    #[error("instance is not ordered: no common good order exists")]
    NotOrdered,
    #[error("instance does not have identical valuations")]
    NotIdentical,
    #[error("envy graph is acyclic: no cycle to eliminate")]
    NoCycle,
    #[error("unknown algorithm `{name}` (valid: {valid})")]
    UnknownAlgorithm { name: String, valid: String },
    #[error("unknown predicate `{name}` (valid: {valid})")]
    UnknownPredicate { name: String, valid: String },
    #[error("resource limit exceeded: {required} states required, cap is {cap}")]
    ResourceLimit { required: String, cap: u64 },
    #[error("JSON error: {0}")]
    Json(String),
}

pub type Result<T> = std::result::Result<T, Error>;
