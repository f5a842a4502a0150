use std::path::PathBuf;

use thiserror::Error;

pub const EXIT_THRESHOLD: u8 = 1;
pub const EXIT_VALIDATION: u8 = 2;
pub const EXIT_REGIME: u8 = 3;
pub const EXIT_NONCONVERGENCE: u8 = 4;

#[derive(Debug, Error)]
pub enum CliError {
    #[error(transparent)]
    Core(#[from] powmean::Error),

    #[error("{origin}:{line}: {message}")]
    Parse {
        origin: String,
        line: u64,
        message: String,
    },

    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    #[error("{0}")]
    Usage(String),

    #[error("malformed run record: {0}")]
    Record(#[from] serde_json::Error),
}

impl CliError {
    pub fn exit_code(&self) -> u8 {
        match self {
            CliError::Core(e) => match e.root() {
                powmean::Error::InvalidParameter(_) => EXIT_VALIDATION,
                _ => EXIT_REGIME,
            },
            _ => EXIT_VALIDATION,
        }
    }
}
