use std::path::PathBuf;

/// Process exit codes.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ExitStatus {
    Success = 0,
    InputError = 2,
    ProcessingError = 3,
    SweepDegraded = 4,
}

#[derive(Debug, thiserror::Error)]
pub enum CliError {
    #[error("{path}: {message}")]
    Input { path: PathBuf, message: String },
    #[error("invalid {what}: {message}")]
    Invalid { what: String, message: String },
    #[error("processing failed: {0}")]
    Processing(#[from] rirdenoise_core::Error),
    #[error("{path}: write failed: {message}")]
    Output { path: PathBuf, message: String },
    #[error("sweep degraded: {succeeded} of {total} trials succeeded")]
    Degraded { succeeded: usize, total: usize },
}

impl CliError {
    pub fn input(path: impl Into<PathBuf>, message: impl std::fmt::Display) -> Self {
        Self::Input { path: path.into(), message: message.to_string() }
    }

    pub fn invalid(what: impl Into<String>, message: impl std::fmt::Display) -> Self {
        Self::Invalid { what: what.into(), message: message.to_string() }
    }

    pub fn output(path: impl Into<PathBuf>, message: impl std::fmt::Display) -> Self {
        Self::Output { path: path.into(), message: message.to_string() }
    }

    pub fn exit_status(&self) -> ExitStatus {
        match self {
            Self::Input { .. } | Self::Invalid { .. } => ExitStatus::InputError,
            Self::Processing(_) | Self::Output { .. } => ExitStatus::ProcessingError,
            Self::Degraded { .. } => ExitStatus::SweepDegraded,
        }
    }
}
