use std::path::PathBuf;

use thiserror::Error;

/// Errors raised anywhere in the simulate / fit / analyze pipeline.
#[derive(Debug, Error)]
pub enum Error {
    #[error("dimension mismatch: {0}")]
    DimensionMismatch(String),

    #[error("site {site} out of range for a chain of {n} spins")]
    SiteOutOfRange { site: usize, n: usize },

    #[error("matrix dimension {0} is not a power of two")]
    NotPowerOfTwo(usize),

    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("invariant violated at snapshot {snapshot} (t = {time}): {detail}")]
    InvariantViolation {
        snapshot: usize,
        time: f64,
        detail: String,
    },

    #[error("numerical failure: {0}")]
    Numerical(String),

    #[error("spectrum looks defective (possible Jordan block): {0}")]
    Defective(String),

    #[error("parse error in {context}: {detail}")]
    Parse { context: String, detail: String },

    #[error("config error: {0}")]
    Config(String),

    #[error("missing artifact '{name}' at {path} (run `{stage}` first)")]
    MissingArtifact {
        name: String,
        stage: String,
        path: PathBuf,
    },

    #[error("I/O error on {path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
}

impl Error {
    pub(crate) fn parse(context: impl Into<String>, detail: impl Into<String>) -> Self {
        Error::Parse {
            context: context.into(),
            detail: detail.into(),
        }
    }

    pub(crate) fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Error::Io {
            path: path.into(),
            source,
        }
    }

    /// Coarse classification used for process exit codes.
    pub fn kind(&self) -> ErrorKind {
        match self {
            Error::InvariantViolation { .. } | Error::Numerical(_) | Error::Defective(_) => {
                ErrorKind::Numerical
            }
            Error::Io { .. } | Error::MissingArtifact { .. } | Error::Parse { .. } => ErrorKind::Io,
            _ => ErrorKind::Usage,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ErrorKind {
    /// Bad arguments, configuration, or parameters.
    Usage,
    /// A simulation invariant or spectral computation failed.
    Numerical,
    /// Unreadable, unwritable, missing, or malformed artifact files.
    Io,
}

pub type Result<T, E = Error> = std::result::Result<T, E>;
