use std::fmt;
use std::path::{Path, PathBuf};

use flrd::FlrdError;

#[derive(Debug)]
pub enum CliError {
    Io { path: PathBuf, source: std::io::Error },
    Parse { path: PathBuf, row: usize, column: usize, message: String },
    Config(String),
    Usage(String),
    Mismatch(String),
    Core(FlrdError),
}

impl CliError {
    pub fn io(path: &Path, source: std::io::Error) -> Self {
        CliError::Io { path: path.to_path_buf(), source }
    }

    /// Tag printed after `error:`.
    pub fn kind(&self) -> &'static str {
        match self {
            CliError::Io { .. } => "io",
            CliError::Parse { .. } => "parse",
            CliError::Config(_) => "config",
            CliError::Usage(_) => "usage",
            CliError::Mismatch(_) => "dimension-mismatch",
            CliError::Core(e) => e.kind(),
        }
    }
}

impl fmt::Display for CliError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            CliError::Io { path, source } => write!(f, "{}: {source}", path.display()),
            CliError::Parse { path, row, column, message } => {
                write!(f, "{}: row {row}, column {column}: {message}", path.display())
            }
            CliError::Config(m) | CliError::Usage(m) | CliError::Mismatch(m) => f.write_str(m),
            CliError::Core(e) => write!(f, "{e}"),
        }
    }
}

impl From<FlrdError> for CliError {
    fn from(e: FlrdError) -> Self {
        CliError::Core(e)
    }
}

pub type CliResult<T> = Result<T, CliError>;
