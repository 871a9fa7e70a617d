use std::path::PathBuf;

use thiserror::Error;

#[derive(Debug, Error)]
pub enum CliError {
    #[error("config error: {0}")]
    Config(String),

    /// One or more checks failed; carries the failing names.
    #[error("check failure: {}", .0.join(", "))]
    Check(Vec<String>),

    #[error("{}: {source}", path.display())]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    #[error(transparent)]
    Core(#[from] gtzw_core::Error),
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Config(_) => 2,
            CliError::Check(_) => 3,
            CliError::Io { .. } => 4,
            CliError::Core(gtzw_core::Error::Argument(_) | gtzw_core::Error::Domain(_)) => 2,
            CliError::Core(_) => 3,
        }
    }

    pub fn io(path: impl Into<PathBuf>) -> impl FnOnce(std::io::Error) -> Self {
        let path = path.into();
        move |source| CliError::Io { path, source }
    }
}

pub type CliResult<T> = Result<T, CliError>;
