use thiserror::Error;

#[derive(Debug, Error)]
pub enum CliError {
    #[error("config error: {0}")]
    Config(String),

    #[error(transparent)]
    Core(#[from] gps_core::Error),

    #[error("i/o error: {0}")]
    Io(String),

    /// A cross-check ran but did not pass.
    #[error("check failed: {0}")]
    CheckFailed(String),
}

impl CliError {
    /// 0 ok, 1 other failure, 2 config, 3 budget, 4 inconclusive bracket.
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Config(_) => 2,
            CliError::Core(gps_core::Error::InvalidParameter(_)) => 2,
            CliError::Core(gps_core::Error::Budget { .. }) => 3,
            CliError::Core(gps_core::Error::Inconclusive(_)) => 4,
            CliError::Core(_) | CliError::Io(_) | CliError::CheckFailed(_) => 1,
        }
    }
}

impl From<std::io::Error> for CliError {
    fn from(e: std::io::Error) -> Self {
        CliError::Io(e.to_string())
    }
}
