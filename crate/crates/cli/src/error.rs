use std::process::ExitCode;

use thiserror::Error;

#[derive(Debug, Error)]
pub enum CliError {
    /// Bad arguments or unusable input files: exit code 2.
    #[error("usage: {0}")]
    Usage(String),
    /// A program or scheme failed its checks: exit code 1.
    #[error("{0}")]
    Failed(String),
    #[error(transparent)]
    Lib(#[from] qbplab::Error),
    #[error("i/o error: {0}")]
    Io(#[from] std::io::Error),
}

impl CliError {
    pub fn exit_code(&self) -> ExitCode {
        match self {
            CliError::Usage(_) | CliError::Io(_) => ExitCode::from(2),
            CliError::Lib(qbplab::Error::InvalidArgument(_)) => ExitCode::from(2),
            CliError::Lib(
                qbplab::Error::Syntax { .. } | qbplab::Error::Field { .. } | qbplab::Error::DanglingId(_),
            ) => ExitCode::from(2),
            CliError::Failed(_) | CliError::Lib(_) => ExitCode::from(1),
        }
    }
}

pub type CliResult<T> = Result<T, CliError>;

pub fn usage(msg: impl Into<String>) -> CliError {
    CliError::Usage(msg.into())
}
