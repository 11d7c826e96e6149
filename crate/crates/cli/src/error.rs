use std::io;
use std::path::PathBuf;

use thiserror::Error;

#[derive(Debug, Error)]
pub enum CliError {
    #[error("usage: {0}")]
    Usage(String),

    #[error("file not found: {}", .0.display())]
    MissingFile(PathBuf),

    #[error("{0}")]
    Core(annet_core::Error),

    #[error("{}: {source}", path.display())]
    Io {
        path: PathBuf,
        #[source]
        source: io::Error,
    },

    #[error("invalid config file {}: {message}", path.display())]
    Config { path: PathBuf, message: String },

    #[error("{0}")]
    ChecksFailed(String),
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Usage(_) | CliError::MissingFile(_) | CliError::Config { .. } => 2,
            _ => 1,
        }
    }

    /// Short machine-readable category printed with the message.
    pub fn kind(&self) -> &'static str {
        match self {
            CliError::Usage(_) => "usage",
            CliError::MissingFile(_) => "missing_file",
            CliError::Core(annet_core::Error::InvalidArgument(_)) => "invalid_argument",
            CliError::Core(annet_core::Error::InvalidConfiguration(_)) => "invalid_configuration",
            CliError::Core(annet_core::Error::DomainViolation { .. }) => "domain_violation",
            CliError::Core(annet_core::Error::Parse { .. }) => "parse",
            CliError::Core(annet_core::Error::Numerical(_)) => "numerical",
            CliError::Core(annet_core::Error::Io { .. }) | CliError::Io { .. } => "io",
            CliError::Config { .. } => "config",
            CliError::ChecksFailed(_) => "checks_failed",
        }
    }

    pub(crate) fn io(path: impl Into<PathBuf>, source: io::Error) -> Self {
        let path = path.into();
        if source.kind() == io::ErrorKind::NotFound {
            CliError::MissingFile(path)
        } else {
            CliError::Io { path, source }
        }
    }
}

impl From<annet_core::Error> for CliError {
    fn from(e: annet_core::Error) -> Self {
        match e {
            annet_core::Error::Io { path, source } => CliError::io(path, source),
            other => CliError::Core(other),
        }
    }
}

pub type Result<T> = std::result::Result<T, CliError>;
