use convexpos::ErrorKind;
use thiserror::Error;

#[derive(Debug, Error)]
pub enum CliError {
    #[error(transparent)]
    Core(#[from] convexpos::Error),
    #[error("cannot read {path}: {message}")]
    Read { path: String, message: String },
    #[error("cannot write {path}: {message}")]
    Write { path: String, message: String },
    #[error("bad points file {path}: {message}")]
    Points { path: String, message: String },
    #[error("{0}")]
    Usage(String),
}

impl CliError {
    /// Process exit status: 2 for bad input, 3 for numerical failure, 4 when
    /// a size guard trips.
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Core(e) => match e.kind() {
                ErrorKind::Input => 2,
                ErrorKind::Numerical => 3,
                ErrorKind::Guard => 4,
            },
            CliError::Write { .. } => 1,
            _ => 2,
        }
    }
}

pub type CliResult<T> = Result<T, CliError>;
