use std::path::PathBuf;

use thiserror::Error;

/// Errors produced by the library and surfaced by the command line tool.
#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid input: {0}")]
    InvalidInput(String),

    #[error("no unique steady state: {0}")]
    NoUniqueSteadyState(String),

    #[error("domain error: {0}")]
    Domain(String),

    #[error("numerical failure: {0}")]
    Numerical(String),

    #[error("i/o error at {path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
}

impl Error {
    pub(crate) fn invalid(msg: impl Into<String>) -> Self {
        Error::InvalidInput(msg.into())
    }

    pub(crate) fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Error::Io {
            path: path.into(),
            source,
        }
    }

    /// Process exit code for this error: 2 invalid input, 3 I/O, 4 numerical.
    pub fn exit_code(&self) -> i32 {
        match self {
            Error::InvalidInput(_) | Error::NoUniqueSteadyState(_) | Error::Domain(_) => 2,
            Error::Io { .. } => 3,
            Error::Numerical(_) => 4,
        }
    }

    /// The message without the kind prefix of the `Display` form.
    pub fn detail(&self) -> String {
        match self {
            Error::InvalidInput(m) | Error::NoUniqueSteadyState(m) | Error::Domain(m) | Error::Numerical(m) => {
                m.clone()
            }
            Error::Io { path, source } => format!("{}: {source}", path.display()),
        }
    }

    /// Short machine-parseable prefix used on the first line of CLI error output.
    pub fn kind(&self) -> &'static str {
        match self {
            Error::InvalidInput(_) => "invalid-input",
            Error::NoUniqueSteadyState(_) => "no-steady-state",
            Error::Domain(_) => "domain",
            Error::Numerical(_) => "numerical",
            Error::Io { .. } => "io",
        }
    }
}

pub type Result<T> = std::result::Result<T, Error>;
