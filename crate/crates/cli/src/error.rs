//! Command errors and their process exit codes.

use std::path::PathBuf;

use kepler_sphere::KeplerError;
use thiserror::Error;

#[derive(Debug, Error)]
pub enum CliError {
    #[error("config error in {path}: {message}")]
    Config { path: PathBuf, message: String },

    #[error("{0}")]
    Kepler(#[from] KeplerError),

    #[error("i/o error on {path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    #[error("malformed record file {path}, line {line}: {message}")]
    Record { path: PathBuf, line: usize, message: String },
}

impl CliError {
    pub fn config(path: impl Into<PathBuf>, message: impl Into<String>) -> Self {
        Self::Config { path: path.into(), message: message.into() }
    }

    pub fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Self::Io { path: path.into(), source }
    }

    /// 2 for bad configuration, 3 for a collision-guard stop, 4 for a
    /// non-negative energy where a bound orbit is required, 5 otherwise.
    pub fn exit_code(&self) -> u8 {
        match self {
            Self::Config { .. } | Self::Kepler(KeplerError::InvalidConfig(_)) => exit::CONFIG,
            Self::Kepler(KeplerError::CollisionProximity { .. }) => exit::COLLISION,
            Self::Kepler(KeplerError::PositiveEnergy { .. }) => exit::POSITIVE_ENERGY,
            _ => exit::RUNTIME,
        }
    }
}

/// Process exit codes.
pub mod exit {
    pub const SUCCESS: u8 = 0;
    pub const VERIFY_FAILED: u8 = 1;
    pub const CONFIG: u8 = 2;
    pub const COLLISION: u8 = 3;
    pub const POSITIVE_ENERGY: u8 = 4;
    pub const RUNTIME: u8 = 5;
}

pub type Result<T, E = CliError> = std::result::Result<T, E>;
