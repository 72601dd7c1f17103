use thiserror::Error;

/// Errors raised across the toolkit.
#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum Error {
    #[error("graph has no vertices")]
    EmptyGraph,
    #[error("vertex set is too small for this operation (need at least {needed}, got {got})")]
    DegenerateSet { needed: usize, got: usize },
    #[error("vertex sets overlap")]
    OverlappingSets,
    #[error("invalid class sizes: {0}")]
    BadSizes(String),
    #[error("invalid parameter: {0}")]
    BadParameter(String),
    #[error("vertex {vertex} out of range for a graph on {n} vertices")]
    VertexOutOfRange { vertex: usize, n: usize },
    #[error("pattern has {n} vertices; colouring enumeration is capped at {cap}")]
    PatternTooLarge { n: usize, cap: usize },
    #[error("invariant is undefined: {0}")]
    Degenerate(String),
    #[error("search budget exhausted after {nodes} nodes")]
    Timeout { nodes: u64 },
    #[error("stuck in stage `{stage}`: {detail}")]
    Stuck { stage: &'static str, detail: String },
    #[error("internal consistency failure: {0}")]
    Internal(String),
    #[error("parse error: {0}")]
    Parse(String),
}

pub type Result<T> = std::result::Result<T, Error>;
