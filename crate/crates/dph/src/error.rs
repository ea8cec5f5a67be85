use std::path::PathBuf;

/// Everything the command line can fail with. Each variant maps to a stable
/// name printed on stderr and to an exit code.
#[derive(Debug, thiserror::Error)]
pub enum CliError {
    #[error("{0}")]
    Config(String),
    #[error("{path}: {source}")]
    Io { path: PathBuf, source: std::io::Error },
    #[error("{path}:{line}: {msg}")]
    Parse { path: PathBuf, line: usize, msg: String },
    #[error(transparent)]
    Domain(#[from] dph_core::Error),
}

pub type Result<T> = std::result::Result<T, CliError>;

impl CliError {
    pub fn config(msg: impl Into<String>) -> Self {
        CliError::Config(msg.into())
    }

    pub fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        CliError::Io {
            path: path.into(),
            source,
        }
    }

    pub fn name(&self) -> &'static str {
        match self {
            CliError::Config(_) => "INVALID_CONFIG",
            CliError::Io { .. } => "IO",
            CliError::Parse { .. } => "PARSE",
            CliError::Domain(e) => e.name(),
        }
    }

    /// 1 for usage and configuration problems, 2 for everything found while running.
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Config(_) => 1,
            _ => 2,
        }
    }
}
