use std::path::PathBuf;

use thiserror::Error;

/// Failure modes shared by the library and the CLI. Each maps to a stable
/// process exit code.
#[derive(Debug, Error)]
pub enum Error {
    #[error("config error (line {line}, key `{key}`): {message}")]
    Config {
        key: String,
        /// 1-based line in the config file; 0 for command-line flags.
        line: usize,
        message: String,
    },
    #[error("invariant violated: {0}")]
    Invariant(String),
    #[error("numerical failure in {operation}: {message}")]
    Numerical {
        operation: &'static str,
        message: String,
    },
    #[error("i/o error on {}: {source}", path.display())]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
}

impl Error {
    pub fn invariant(msg: impl Into<String>) -> Self {
        Error::Invariant(msg.into())
    }

    pub fn numerical(operation: &'static str, msg: impl Into<String>) -> Self {
        Error::Numerical {
            operation,
            message: msg.into(),
        }
    }

    pub fn config(key: impl Into<String>, line: usize, msg: impl Into<String>) -> Self {
        Error::Config {
            key: key.into(),
            line,
            message: msg.into(),
        }
    }

    pub fn exit_code(&self) -> i32 {
        match self {
            Error::Config { .. } => 2,
            Error::Invariant(_) => 3,
            Error::Numerical { .. } => 4,
            Error::Io { .. } => 1,
        }
    }

    pub fn kind(&self) -> &'static str {
        match self {
            Error::Config { .. } => "config",
            Error::Invariant(_) => "invariant",
            Error::Numerical { .. } => "numerical",
            Error::Io { .. } => "io",
        }
    }
}

pub type Result<T> = std::result::Result<T, Error>;
