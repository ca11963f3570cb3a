use thiserror::Error;

use crate::partition::CommunityId;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    /// Bad input value, e.g. a non-positive edge weight.
    #[error("invalid input: {0}")]
    Input(String),

    #[error("parse error at line {line}: {message}")]
    Parse { line: usize, message: String },

    /// Operation is not defined on the given state (e.g. modularity with m = 0).
    #[error("domain error: {0}")]
    Domain(String),

    #[error("unknown node {0}")]
    UnknownNode(usize),

    #[error("community {0} is not live")]
    DeadCommunity(CommunityId),

    /// A caller broke a documented precondition.
    #[error("contract violation: {0}")]
    Contract(String),

    #[error("level {level} out of range (hierarchy has {levels} levels)")]
    LevelOutOfRange { level: usize, levels: usize },

    #[error("graph has {nodes} nodes, exhaustive search is limited to {max}")]
    TooLarge { nodes: usize, max: usize },

    #[error("event stream error at line {line}: {message}")]
    Stream { line: usize, message: String },
}
