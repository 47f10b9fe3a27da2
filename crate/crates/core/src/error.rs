use alloc::string::String;

use crate::graph::VertexId;

pub type Result<T, E = Error> = core::result::Result<T, E>;

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum Error {
    #[error("unknown vertex id {0}")]
    UnknownVertex(VertexId),
    #[error("malformed graph: {0}")]
    MalformedGraph(String),
    #[error("empty vertex set")]
    EmptySet,
    #[error("invalid parameter: {0}")]
    InvalidParameter(String),
    #[error("query leaves the trusted region: {0}")]
    Untrusted(String),
    #[error("exhaustive search capped at {cap} elements, got {size}")]
    CapExceeded { cap: usize, size: usize },
    #[error("not a group: {0}")]
    NotAGroup(String),
    #[error("unknown generator {0}")]
    UnknownGenerator(String),
    #[error("budget of {0} states exceeded")]
    BudgetExceeded(usize),
    #[error("precondition violated: {0}")]
    Precondition(String),
    #[error("structural check failed: {0}")]
    Structure(String),
}
