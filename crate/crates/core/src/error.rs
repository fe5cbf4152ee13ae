use std::path::PathBuf;

/// Errors raised across the toolkit.
#[derive(Debug, thiserror::Error)]
pub enum Error {
    #[error("dimension mismatch: expected {expected}, found {found}")]
    DimensionMismatch { expected: usize, found: usize },

    #[error("invalid specification: {0}")]
    InvalidSpec(String),

    #[error("configuration error in `{field}`: {reason}")]
    Config { field: String, reason: String },

    #[error("i/o error on {path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    #[error("parse error at line {line}: {reason}")]
    Parse { line: usize, reason: String },

    #[error("json error: {0}")]
    Json(#[from] serde_json::Error),

    #[error("training trace has no recorded iterates")]
    EmptyTrace,

    #[error("region `{0}` contains no samples")]
    EmptyRegion(&'static str),

    #[error("partition direction has zero norm")]
    ZeroDirection,

    #[error("polynomial degree {0} exceeds the supported maximum of 64")]
    DegreeOverflow(usize),

    #[error("feature count {0} exceeds the limit of 1000000")]
    SizeOverflow(u128),

    #[error("remez exchange did not converge: {0}")]
    NoConvergence(String),

    #[error("numeric failure: {0}")]
    Numeric(String),
}

impl Error {
    pub(crate) fn config(field: impl Into<String>, reason: impl Into<String>) -> Self {
        Error::Config {
            field: field.into(),
            reason: reason.into(),
        }
    }

    pub(crate) fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Error::Io {
            path: path.into(),
            source,
        }
    }

    /// Process exit code: 1 for usage/config/input problems, 2 for numeric failures.
    pub fn exit_code(&self) -> i32 {
        match self {
            Error::EmptyTrace
            | Error::EmptyRegion(_)
            | Error::ZeroDirection
            | Error::NoConvergence(_)
            | Error::Numeric(_) => 2,
            _ => 1,
        }
    }
}

pub type Result<T> = std::result::Result<T, Error>;

pub(crate) fn check_dim(expected: usize, found: usize) -> Result<()> {
    if expected == found {
        Ok(())
    } else {
        Err(Error::DimensionMismatch { expected, found })
    }
}
