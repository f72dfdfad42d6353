use thiserror::Error;

#[derive(Debug, Error)]
pub enum CliError {
    /// Bad flags, config or observable names. Exit code 2.
    #[error("{0}")]
    Usage(String),

    #[error(transparent)]
    Core(#[from] eventum_core::Error),

    #[error("i/o error: {0}")]
    Io(#[from] std::io::Error),
}

impl CliError {
    pub fn usage(msg: impl Into<String>) -> Self {
        CliError::Usage(msg.into())
    }

    pub fn exit_code(&self) -> u8 {
        match self {
            CliError::Usage(_) => 2,
            CliError::Core(_) | CliError::Io(_) => 1,
        }
    }
}
