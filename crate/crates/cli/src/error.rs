use std::path::PathBuf;

use thiserror::Error;

/// Process exit codes.
pub mod exit {
    pub const OK: u8 = 0;
    pub const CONFIG: u8 = 1;
    pub const FELL_OVER: u8 = 2;
    pub const TRACK_EXCEEDED: u8 = 3;
    pub const SEARCH_FAILED: u8 = 4;
    pub const IO: u8 = 5;
    pub const UNKNOWN_SCENARIO: u8 = 6;
}

#[derive(Debug, Error)]
pub enum CliError {
    #[error("{0}")]
    Config(String),
    #[error("unknown scenario '{0}' (available: S1, S2, S3, S4, S5, S6)")]
    UnknownScenario(String),
    #[error("{}: {source}", path.display())]
    Io {
        path: PathBuf,
        source: std::io::Error,
    },
    #[error(transparent)]
    Core(#[from] cartpole_core::Error),
}

impl CliError {
    pub fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        CliError::Io {
            path: path.into(),
            source,
        }
    }

    pub fn exit_code(&self) -> u8 {
        match self {
            CliError::Config(_) | CliError::Core(_) => exit::CONFIG,
            CliError::UnknownScenario(_) => exit::UNKNOWN_SCENARIO,
            CliError::Io { .. } => exit::IO,
        }
    }
}
