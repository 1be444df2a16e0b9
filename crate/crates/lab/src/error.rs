use std::process::ExitCode;

#[derive(Debug, thiserror::Error)]
pub enum LabError {
    /// Unreadable, unparsable or inconsistent configuration.
    #[error("config error: {0}")]
    Config(String),
    #[error(transparent)]
    Core(#[from] twowell_core::Error),
    #[error("io error: {0}")]
    Io(#[from] std::io::Error),
    #[error("{0}")]
    Failed(String),
}

impl LabError {
    pub fn exit_code(&self) -> ExitCode {
        match self {
            LabError::Config(_) => ExitCode::from(2),
            _ => ExitCode::from(1),
        }
    }
}
