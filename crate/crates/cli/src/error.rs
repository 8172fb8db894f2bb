use thiserror::Error;

/// Errors split by exit code: bad input exits with 2, anything that goes
/// wrong while running exits with 1.
#[derive(Debug, Error)]
pub enum CliError {
    #[error("{0}")]
    Validation(String),

    #[error("{0}")]
    Runtime(String),
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Validation(_) => 2,
            CliError::Runtime(_) => 1,
        }
    }
}

impl From<fourier_head::Error> for CliError {
    fn from(e: fourier_head::Error) -> Self {
        use fourier_head::Error as E;
        match e {
            E::InvalidArgument(_) | E::DimensionMismatch { .. } | E::OutOfDomain { .. } | E::Json(_) => {
                CliError::Validation(e.to_string())
            }
            E::Degenerate(_) | E::NonFiniteLoss { .. } | E::Io(_) => CliError::Runtime(e.to_string()),
        }
    }
}

impl From<std::io::Error> for CliError {
    fn from(e: std::io::Error) -> Self {
        CliError::Runtime(e.to_string())
    }
}

pub type CliResult<T> = Result<T, CliError>;

pub fn validation<T>(msg: impl Into<String>) -> CliResult<T> {
    Err(CliError::Validation(msg.into()))
}
