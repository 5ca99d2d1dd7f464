use std::path::PathBuf;
use thiserror::Error;

/// Errors produced by the waterway toolkit.
#[derive(Debug, Error)]
pub enum Error {
    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    #[error("parse error at {path}:{line}: {message}")]
    Parse {
        path: PathBuf,
        line: u64,
        message: String,
    },

    #[error("validation error: {0}")]
    Validation(String),

    #[error("point is outside the waterway corridor (nearest km {nearest_km:.4}, lateral {lateral:.1} m)")]
    OutOfCorridor { nearest_km: f64, lateral: f64 },

    #[error("km {km:.4} is outside the covered range [{min:.4}, {max:.4}]")]
    OutOfCoverage { km: f64, min: f64, max: f64 },

    #[error("step {step}: {source}")]
    AtStep {
        step: usize,
        #[source]
        source: Box<Error>,
    },

    #[error("invalid input: {0}")]
    InvalidInput(String),

    #[error("json: {0}")]
    Json(#[from] serde_json::Error),
}

impl Error {
    pub(crate) fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Error::Io {
            path: path.into(),
            source,
        }
    }

    pub(crate) fn at_step(step: usize, source: Error) -> Self {
        Error::AtStep {
            step,
            source: Box::new(source),
        }
    }

    /// Process exit code: 1 for usage errors, 2 for unreadable or invalid
    /// input data, 3 for internal failures.
    pub fn exit_code(&self) -> i32 {
        use std::io::ErrorKind;
        match self {
            Error::InvalidInput(_) => 1,
            Error::Io { source, .. } => match source.kind() {
                ErrorKind::NotFound | ErrorKind::PermissionDenied | ErrorKind::InvalidData => 2,
                _ => 3,
            },
            Error::AtStep { source, .. } => source.exit_code(),
            _ => 2,
        }
    }
}

pub type Result<T> = std::result::Result<T, Error>;
