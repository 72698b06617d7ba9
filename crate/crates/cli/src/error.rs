use std::path::Path;

use eds_core::dataset::DatasetError;
use thiserror::Error;

#[derive(Debug, Error)]
pub enum CliError {
    /// Bad arguments or inputs that parse but make no sense.
    #[error("{0}")]
    Invalid(String),
    #[error("{0}")]
    Io(String),
}

impl CliError {
    pub fn exit_code(&self) -> u8 {
        match self {
            CliError::Invalid(_) => 2,
            CliError::Io(_) => 3,
        }
    }

    pub fn invalid(msg: impl std::fmt::Display) -> Self {
        CliError::Invalid(msg.to_string())
    }

    pub fn io(path: &Path, err: impl std::fmt::Display) -> Self {
        CliError::Io(format!("{}: {err}", path.display()))
    }

    /// Dataset failures on `path`: I/O problems map to exit 3, content
    /// problems to exit 2.
    pub fn dataset(path: &Path, err: DatasetError) -> Self {
        if err.is_io() {
            Self::io(path, err)
        } else {
            CliError::Invalid(format!("{}: {err}", path.display()))
        }
    }
}

pub type CliResult<T> = Result<T, CliError>;
