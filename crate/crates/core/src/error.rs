use std::path::PathBuf;

use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("domain mismatch: {0}")]
    DomainMismatch(String),

    #[error("unsupported seed ({0}, {1}); expected one of (1,1), (0,1), (0,0), (1,0)")]
    UnsupportedSeed(u8, u8),

    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("invalid system: {0}")]
    InvalidSystem(String),

    #[error("no time found for radius {radius} within horizon {horizon}; best partial match n = {best_time} ({best_satisfied}/{constraints} constraints)")]
    EmptyNet {
        radius: u32,
        horizon: u64,
        best_time: i64,
        best_satisfied: usize,
        constraints: usize,
    },

    #[error("no identity-approximating time within horizon {horizon}; best n = {best_time} with score {best_score}")]
    NoIdentityTimes {
        horizon: u64,
        best_time: u64,
        best_score: f64,
    },

    #[error("scenario validation failed: {}", .0.join("; "))]
    Validation(Vec<String>),

    #[error("i/o error at {path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

impl Error {
    pub(crate) fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Error::Io {
            path: path.into(),
            source,
        }
    }
}
