use std::fmt;

/// Errors raised by the simulator library.
#[derive(Debug, thiserror::Error)]
pub enum Error {
    /// A configuration value is missing, out of range or inconsistent.
    #[error("invalid configuration: `{field}` {reason}")]
    Config { field: String, reason: String },
    /// The particle-removal environment cannot be evaluated.
    #[error("environment error: {0}")]
    Environment(String),
    /// A caller violated a precondition of an internal routine.
    #[error("internal error: {0}")]
    Internal(String),
    /// A line of an input file could not be parsed.
    #[error("line {line}: {reason}")]
    Parse { line: usize, reason: String },
    #[error("I/O error: {0}")]
    Io(#[from] std::io::Error),
}

impl Error {
    pub fn config(field: impl Into<String>, reason: impl fmt::Display) -> Self {
        Error::Config {
            field: field.into(),
            reason: reason.to_string(),
        }
    }

    pub fn parse(line: usize, reason: impl fmt::Display) -> Self {
        Error::Parse {
            line,
            reason: reason.to_string(),
        }
    }
}

pub type Result<T> = std::result::Result<T, Error>;
