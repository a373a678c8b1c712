use std::path::PathBuf;

use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("no events")]
    NoEvents,

    #[error("line {line}: {message}")]
    Parse { line: usize, message: String },

    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    #[error("circle assignment references nodes absent from the friendship graph: {}", .0.join(", "))]
    UnknownCircleNodes(Vec<String>),

    #[error("snapshot index {index} out of range (graph has {count} snapshots)")]
    SnapshotOutOfRange { index: usize, count: usize },

    #[error("node {node} assigned to more than one community in snapshot {snapshot}")]
    OverlappingCommunities { snapshot: usize, node: String },

    #[error("node {node} is not present in snapshot {snapshot}")]
    NodeNotInSnapshot { snapshot: usize, node: String },

    #[error("nothing to label: need at least 2 snapshots, got {0}")]
    NothingToLabel(usize),

    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("empty input: {0}")]
    EmptyInput(&'static str),

    #[error("dimension mismatch: expected {expected}, got {actual}")]
    DimensionMismatch { expected: usize, actual: usize },

    #[error("MAPE undefined: every true extent is zero")]
    MapeUndefined,

    #[error("model file: {0}")]
    Model(String),

    #[error("unsupported model version {found} (supported: {supported})")]
    ModelVersion { found: String, supported: u32 },

    #[error("config line {line}: {message}")]
    Config { line: usize, message: String },

    #[error(transparent)]
    Csv(#[from] csv::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

impl Error {
    pub(crate) fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Error::Io {
            path: path.into(),
            source,
        }
    }

    pub(crate) fn parse(line: usize, message: impl Into<String>) -> Self {
        Error::Parse {
            line,
            message: message.into(),
        }
    }
}
