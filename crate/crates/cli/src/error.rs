use std::path::PathBuf;

use thiserror::Error;

#[derive(Debug, Error)]
pub enum CliError {
    #[error("{0}")]
    Usage(String),

    #[error("{path}: {msg}")]
    Schema { path: String, msg: String },

    #[error("{path}: {source}")]
    Io { path: PathBuf, source: std::io::Error },

    #[error("invalid configuration: {0}")]
    Config(creasim::Error),

    #[error("{0}")]
    Invariant(creasim::Error),
}

impl CliError {
    /// Process exit code: 2 for usage and configuration problems, 3 for invariant breaches.
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Invariant(_) => 3,
            _ => 2,
        }
    }

    pub fn io(path: impl Into<PathBuf>) -> impl FnOnce(std::io::Error) -> CliError {
        let path = path.into();
        move |source| CliError::Io { path, source }
    }
}

impl From<creasim::Error> for CliError {
    fn from(e: creasim::Error) -> Self {
        match e {
            creasim::Error::Invariant(_) => CliError::Invariant(e),
            other => CliError::Config(other),
        }
    }
}
