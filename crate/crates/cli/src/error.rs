use std::path::Path;
use std::process::ExitCode;

use seedscan::Error;
use thiserror::Error;

#[derive(Debug, Error)]
pub enum CliError {
    #[error(transparent)]
    Core(#[from] Error),

    #[error("{0}")]
    Usage(String),

    #[error("low confidence: z-score {z:.2} below {min_z}")]
    LowConfidence { z: f64, min_z: f64 },
}

impl CliError {
    pub fn io(path: &Path, source: std::io::Error) -> Self {
        CliError::Core(Error::Io {
            path: path.to_path_buf(),
            source,
        })
    }

    /// 0 success, 1 I/O, 2 usage or bad input, 3 low confidence, 4 oracle.
    pub fn exit_code(&self) -> ExitCode {
        ExitCode::from(match self {
            CliError::Core(Error::Io { .. }) => 1,
            CliError::Core(Error::Oracle { .. }) => 4,
            CliError::Core(_) | CliError::Usage(_) => 2,
            CliError::LowConfidence { .. } => 3,
        })
    }
}
