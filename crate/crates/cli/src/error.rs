use isoclust_core::ClusterError;
use thiserror::Error;

#[derive(Debug, Clone, Error)]
pub enum CliError {
    /// Unreadable or malformed input data.
    #[error("{0}")]
    Input(String),
    /// Invalid flags, config file entries, or parameters.
    #[error("{0}")]
    Config(String),
    /// Failure while clustering or writing output.
    #[error("{0}")]
    Run(String),
}

impl CliError {
    pub fn exit_code(&self) -> u8 {
        match self {
            CliError::Input(_) => 2,
            CliError::Config(_) => 3,
            CliError::Run(_) => 1,
        }
    }

    /// Classifies a core error raised while loading data.
    pub fn from_ingest(e: ClusterError) -> Self {
        CliError::Input(e.to_string())
    }

    /// Classifies a core error raised while clustering.
    pub fn from_run(e: ClusterError) -> Self {
        match e {
            ClusterError::Argument(_) => CliError::Config(e.to_string()),
            _ => CliError::Run(e.to_string()),
        }
    }
}
