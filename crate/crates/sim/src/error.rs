use std::path::{Path, PathBuf};

use thiserror::Error;

pub type SimResult<T> = Result<T, SimError>;

#[derive(Debug, Error)]
pub enum SimError {
    #[error("config error: {0}")]
    Config(String),
    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
    #[error("{path}: {message}")]
    Format { path: PathBuf, message: String },
    #[error("calibration missing: {0}")]
    CalibrationMissing(String),
    #[error("calibration does not match the scenario (artifact {artifact}, scenario {scenario})")]
    CalibrationMismatch { artifact: String, scenario: String },
    #[error("{context}: {source}")]
    Core {
        context: String,
        #[source]
        source: uaic_core::Error,
    },
}

impl SimError {
    pub fn io(path: &Path, source: std::io::Error) -> Self {
        SimError::Io {
            path: path.to_path_buf(),
            source,
        }
    }

    pub fn format(path: &Path, message: impl ToString) -> Self {
        SimError::Format {
            path: path.to_path_buf(),
            message: message.to_string(),
        }
    }

    pub fn core(context: impl Into<String>, source: uaic_core::Error) -> Self {
        SimError::Core {
            context: context.into(),
            source,
        }
    }

    /// Process exit code: 2 config, 3 divergence, 4 calibration missing,
    /// 1 anything else.
    pub fn exit_code(&self) -> i32 {
        use uaic_core::Error as E;
        match self {
            SimError::Config(_) => 2,
            SimError::CalibrationMissing(_) | SimError::CalibrationMismatch { .. } => 4,
            SimError::Core { source, .. } => match source {
                E::PlantDivergence | E::ControllerDivergence { .. } | E::IsolationDivergence { .. } => 3,
                E::InvalidInput(_) => 2,
                _ => 1,
            },
            SimError::Io { .. } | SimError::Format { .. } => 1,
        }
    }
}
