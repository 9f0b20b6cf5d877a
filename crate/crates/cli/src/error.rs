use thiserror::Error;

#[derive(Debug, Error)]
pub enum CliError {
    #[error("configuration error: {0}")]
    Config(String),
    #[error("numeric failure: {0}")]
    Numeric(#[from] simply_core::Error),
    #[error("I/O failure on {path}: {source}")]
    Io { path: String, source: std::io::Error },
    #[error("serialization failure on {path}: {reason}")]
    Serialize { path: String, reason: String },
}

impl CliError {
    pub fn exit_code(&self) -> u8 {
        match self {
            CliError::Config(_) => 1,
            CliError::Numeric(_) => 2,
            CliError::Io { .. } | CliError::Serialize { .. } => 3,
        }
    }
}
