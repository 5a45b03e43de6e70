use std::path::PathBuf;

use thiserror::Error;

pub type Result<T, E = CliError> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum CliError {
    #[error(transparent)]
    Core(#[from] drqa_core::Error),

    #[error("{}: {source}", path.display())]
    Io { path: PathBuf, source: std::io::Error },

    #[error("{}: {message}", path.display())]
    Csv { path: PathBuf, message: String },

    #[error("column {column} has no observed values")]
    EmptyColumn { column: String },

    #[error("config: {0}")]
    Config(String),

    #[error("stage {index} ({stage}) failed: {source}")]
    Stage { index: usize, stage: &'static str, source: Box<CliError> },
}

impl CliError {
    pub(crate) fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        CliError::Io { path: path.into(), source }
    }

    pub(crate) fn csv(path: impl Into<PathBuf>, message: impl Into<String>) -> Self {
        CliError::Csv { path: path.into(), message: message.into() }
    }
}
