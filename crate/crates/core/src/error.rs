use thiserror::Error;

/// Errors produced by the clustering engine.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum ClusterError {
    /// A caller-supplied argument violates an operation's precondition.
    #[error("invalid argument: {0}")]
    Argument(String),

    /// Malformed delimited input.
    #[error("parse error at line {line}: {message}")]
    Parse { line: usize, message: String },

    /// Every row was removed (or none was present).
    #[error("no data rows remain: {0}")]
    EmptyData(String),

    /// A non-finite value showed up where arithmetic requires finite input.
    #[error("numeric error: {0}")]
    Numeric(String),

    /// The silhouette coefficient needs at least two clusters.
    #[error("silhouette undefined for {k} cluster(s)")]
    SilhouetteUndefined { k: usize },
}

pub type Result<T> = std::result::Result<T, ClusterError>;

pub(crate) fn arg_err<T>(msg: impl Into<String>) -> Result<T> {
    Err(ClusterError::Argument(msg.into()))
}
