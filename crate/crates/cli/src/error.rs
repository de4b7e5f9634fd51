use permlab::LabError;
use thiserror::Error;

#[derive(Debug, Error)]
pub enum CliError {
    #[error("usage: {0}")]
    Usage(String),

    #[error("i/o: {0}")]
    Io(String),

    #[error(transparent)]
    Lab(#[from] LabError),
}

impl CliError {
    /// `1` for a failed theorem-level invariant, `2` for bad input, `3`
    /// for anything else.
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Lab(LabError::Invariant(_)) => 1,
            CliError::Usage(_)
            | CliError::Lab(LabError::InvalidParams(_))
            | CliError::Lab(LabError::InvalidDistribution(_))
            | CliError::Lab(LabError::Capacity { .. }) => 2,
            _ => 3,
        }
    }
}

impl From<std::io::Error> for CliError {
    fn from(e: std::io::Error) -> Self {
        CliError::Io(e.to_string())
    }
}

pub fn usage(msg: impl Into<String>) -> CliError {
    CliError::Usage(msg.into())
}
