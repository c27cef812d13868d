use thiserror::Error;

#[derive(Debug, Error)]
pub enum CliError {
    /// Malformed arguments, files or configurations.
    #[error("{0}")]
    Input(String),
    #[error(transparent)]
    Core(#[from] timesub_core::Error),
    #[error("internal error: {0}")]
    Internal(String),
}

impl CliError {
    /// 2 for input errors, 3 for domain errors, 4 for internal failures.
    pub fn exit_code(&self) -> u8 {
        match self {
            CliError::Input(_) => 2,
            CliError::Core(e) if e.is_domain() => 3,
            CliError::Core(_) => 2,
            CliError::Internal(_) => 4,
        }
    }
}
