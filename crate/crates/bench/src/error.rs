use std::io;

use thiserror::Error;

use crate::harness::Mismatch;

pub type Result<T> = std::result::Result<T, BenchError>;

#[derive(Debug, Error)]
pub enum BenchError {
    #[error("invalid configuration: {0}")]
    Config(String),

    #[error(transparent)]
    Core(#[from] apsp_core::Error),

    #[error("verification failed: {0}")]
    Verification(Mismatch),

    #[error(transparent)]
    Io(#[from] io::Error),

    #[error(transparent)]
    Csv(#[from] csv::Error),
}

impl BenchError {
    /// Process exit status: 1 verification failure, 2 usage or
    /// configuration error, 3 IO error.
    pub fn exit_code(&self) -> i32 {
        use apsp_core::Error as Core;
        match self {
            BenchError::Verification(_) => 1,
            BenchError::Config(_) => 2,
            BenchError::Io(_) | BenchError::Csv(_) => 3,
            BenchError::Core(e) => match e {
                Core::Io(_)
                | Core::MalformedHeader(_)
                | Core::SizeMismatch(_)
                | Core::Truncated { .. }
                | Core::InvalidEntry(_)
                | Core::Parse { .. } => 3,
                _ => 2,
            },
        }
    }
}
