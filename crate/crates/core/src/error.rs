use std::path::PathBuf;

use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("dimension mismatch: {0}")]
    DimensionMismatch(String),

    /// A factor update produced a non-finite entry.
    #[error(
        "numerical divergence: non-finite value in {matrix}[{row}, {col}] at iteration {iteration}; \
         try a smaller learning rate (--eta)"
    )]
    Divergence {
        matrix: &'static str,
        row: usize,
        col: usize,
        iteration: usize,
    },

    #[error("parse error at line {line}, column {column}: {message}")]
    Parse {
        line: usize,
        column: usize,
        message: String,
    },

    #[error("undefined metric: {0}")]
    UndefinedMetric(String),

    #[error("usage error: {0}")]
    Usage(String),

    #[error("i/o error on {path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    #[error("json error: {0}")]
    Json(#[from] serde_json::Error),
}

impl Error {
    pub(crate) fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Error::Io {
            path: path.into(),
            source,
        }
    }

    /// Process exit code for the CLI: 2 usage, 3 data, 4 divergence.
    pub fn exit_code(&self) -> i32 {
        match self {
            Error::Usage(_) | Error::InvalidArgument(_) => 2,
            Error::Divergence { .. } => 4,
            _ => 3,
        }
    }
}
