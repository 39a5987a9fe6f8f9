use std::path::PathBuf;

use thiserror::Error;

#[derive(Debug, Error)]
pub enum CliError {
    #[error("cannot read {path}: {source}")]
    Read {
        path: PathBuf,
        source: std::io::Error,
    },
    #[error("cannot write {path}: {source}")]
    Write {
        path: PathBuf,
        source: std::io::Error,
    },
    #[error("malformed config: {0}")]
    Syntax(String),
    #[error("unknown config key: {0}")]
    UnknownKey(String),
    #[error("invalid value: {0}")]
    InvalidValue(String),
    #[error("simulation failed: {0}")]
    Sim(#[from] hdfd_core::Error),
    #[error("output encoding failed: {0}")]
    Encode(String),
}

impl CliError {
    /// Process exit code; each diagnostic class gets its own.
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Syntax(_) => 3,
            CliError::UnknownKey(_) => 4,
            CliError::InvalidValue(_) => 5,
            CliError::Read { .. } => 6,
            CliError::Write { .. } => 7,
            CliError::Sim(_) => 8,
            CliError::Encode(_) => 9,
        }
    }
}

impl From<serde_json::Error> for CliError {
    fn from(e: serde_json::Error) -> Self {
        let msg = e.to_string();
        if let Some(rest) = msg.strip_prefix("unknown field ") {
            let key = rest
                .split(',')
                .next()
                .unwrap_or(rest)
                .trim_matches('`')
                .to_string();
            return CliError::UnknownKey(key);
        }
        match e.classify() {
            serde_json::error::Category::Data => CliError::InvalidValue(msg),
            _ => CliError::Syntax(msg),
        }
    }
}

pub type Result<T> = std::result::Result<T, CliError>;
