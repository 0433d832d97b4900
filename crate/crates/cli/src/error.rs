use std::process::ExitCode;

use thiserror::Error;

pub type CliResult<T> = Result<T, CliError>;

#[derive(Debug, Error)]
pub enum CliError {
    #[error("cannot parse configuration: {0}")]
    Parse(String),

    #[error("invalid configuration `{key}`: {reason}")]
    Invalid { key: String, reason: String },

    #[error(transparent)]
    Core(#[from] qspec_core::Error),

    #[error("{path}: {source}")]
    Io {
        path: String,
        #[source]
        source: std::io::Error,
    },

    #[error("{path}: {source}")]
    Csv {
        path: String,
        #[source]
        source: csv::Error,
    },
}

impl CliError {
    pub fn invalid(key: impl Into<String>, reason: impl Into<String>) -> Self {
        CliError::Invalid {
            key: key.into(),
            reason: reason.into(),
        }
    }

    pub fn io(path: impl Into<String>, source: std::io::Error) -> Self {
        CliError::Io {
            path: path.into(),
            source,
        }
    }

    /// 2 for numerical failures during computation, 1 for everything that
    /// is caught by validation or I/O.
    pub fn exit_code(&self) -> ExitCode {
        match self {
            CliError::Core(e) if e.is_numerical() => ExitCode::from(2),
            _ => ExitCode::from(1),
        }
    }
}
