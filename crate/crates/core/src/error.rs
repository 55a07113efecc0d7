use std::path::PathBuf;

use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    #[error("{path}: line {line}: {message}")]
    Parse { path: PathBuf, line: u64, message: String },

    #[error("schema: {0}")]
    Schema(String),

    #[error("split: {0}")]
    EmptyPartition(String),

    #[error("node {node} with depth {depth} is out of range for a depth-{tree_depth} tree")]
    NodeOutOfRange {
        node: usize,
        depth: usize,
        tree_depth: usize,
    },

    #[error("warm-start tree has depth {found}, expected {expected}")]
    DepthMismatch { expected: usize, found: usize },

    #[error("budget exceeded: {0}")]
    Budget(String),

    #[error("invalid configuration: {0}")]
    Config(String),

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}
