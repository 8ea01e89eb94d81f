use std::fmt;
use std::path::{Path, PathBuf};

/// Failure of a subcommand, carrying its exit-code class.
#[derive(Debug)]
pub enum CliError {
    Config(String),
    Io { path: PathBuf, source: std::io::Error },
    Validation(String),
    Malformed(String),
    Internal(String),
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Internal(_) => 1,
            CliError::Config(_) => 3,
            CliError::Io { .. } => 4,
            CliError::Validation(_) => 5,
            CliError::Malformed(_) => 6,
        }
    }

    pub fn io(path: &Path, source: std::io::Error) -> Self {
        CliError::Io {
            path: path.to_path_buf(),
            source,
        }
    }

    /// Map a library error, naming `path` for I/O and parse failures.
    pub fn from_core(err: spdt_core::Error, path: Option<&Path>) -> Self {
        use spdt_core::Error as E;
        let shown = path.map(|p| format!("{}: ", p.display())).unwrap_or_default();
        match err {
            E::Config { .. } | E::Environment(_) => CliError::Config(err.to_string()),
            E::Parse { .. } => CliError::Malformed(format!("{shown}{err}")),
            E::Io(source) => CliError::Io {
                path: path.map(Path::to_path_buf).unwrap_or_default(),
                source,
            },
            E::Internal(_) => CliError::Internal(err.to_string()),
        }
    }
}

impl fmt::Display for CliError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            CliError::Config(m) => write!(f, "configuration error: {m}"),
            CliError::Io { path, source } => write!(f, "I/O error on {}: {source}", path.display()),
            CliError::Validation(m) => write!(f, "validation failed: {m}"),
            CliError::Malformed(m) => write!(f, "malformed input: {m}"),
            CliError::Internal(m) => write!(f, "internal error: {m}"),
        }
    }
}

impl From<spdt_core::Error> for CliError {
    fn from(err: spdt_core::Error) -> Self {
        CliError::from_core(err, None)
    }
}

pub type CliResult<T> = Result<T, CliError>;
