use thiserror::Error;

/// Harness failures, split by the exit code they map to.
#[derive(Debug, Error)]
pub enum HarnessError {
    /// Bad arguments, unreadable or malformed configuration. Exit code 2.
    #[error("usage: {0}")]
    Usage(String),
    /// The experiment ran and failed. Exit code 1.
    #[error("failure: {0}")]
    Failure(String),
}

impl HarnessError {
    pub fn exit_code(&self) -> i32 {
        match self {
            HarnessError::Usage(_) => 2,
            HarnessError::Failure(_) => 1,
        }
    }
}

impl From<pion::Error> for HarnessError {
    fn from(e: pion::Error) -> Self {
        match e {
            pion::Error::Config(_) | pion::Error::Parse(_) => HarnessError::Usage(e.to_string()),
            other => HarnessError::Failure(other.to_string()),
        }
    }
}

pub type HarnessResult<T> = std::result::Result<T, HarnessError>;
