use std::path::PathBuf;

use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    #[error("line {line}: {message}")]
    Parse { line: usize, message: String },

    #[error("duplicate word `{0}`")]
    DuplicateWord(String),

    #[error("dimension mismatch: expected {expected}, got {actual}")]
    DimensionMismatch { expected: usize, actual: usize },

    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("non-finite value in {0}")]
    NonFinite(String),

    #[error("lasso did not converge after {sweeps} sweeps (max coordinate change {last_change:e}, residual norm {residual:e})")]
    LassoNotConverged {
        sweeps: usize,
        last_change: f64,
        residual: f64,
        iterate: Vec<f64>,
    },

    #[error("embedding table is degenerate: {0}")]
    DegenerateInput(String),

    #[error("numerical failure (NaN) in {stage} at {step} {index}")]
    Diverged {
        stage: &'static str,
        step: &'static str,
        index: usize,
    },

    #[error("unknown label `{0}`")]
    UnknownLabel(String),

    #[error("unmapped tag `{0}`")]
    UnmappedTag(String),

    #[error("invalid tag `{0}`")]
    InvalidTag(String),

    #[error("missing resource: {0}")]
    MissingResource(String),

    #[error("empty input: {0}")]
    Empty(String),

    #[error("shape mismatch: {0}")]
    ShapeMismatch(String),

    #[error("model format: {0}")]
    ModelFormat(String),
}

impl Error {
    pub(crate) fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Error::Io {
            path: path.into(),
            source,
        }
    }

    pub(crate) fn parse(line: usize, message: impl Into<String>) -> Self {
        Error::Parse {
            line,
            message: message.into(),
        }
    }
}
