use std::path::PathBuf;

use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("io error on {path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    #[error("{path}: row {row}, column {column}: {reason}")]
    Parse {
        path: PathBuf,
        row: usize,
        column: String,
        reason: String,
    },

    #[error("invalid dataset: {0}")]
    InvalidData(String),

    #[error("invalid configuration: {0}")]
    Config(String),

    #[error("sample {sample} has no landmark memberships")]
    IsolatedSample { sample: usize },

    #[error("eigensolver did not converge after {iterations} iterations (best residual {residual:.3e})")]
    NoConvergence { iterations: usize, residual: f64 },

    #[error("kernel curve fit did not converge: {0}")]
    CurveFit(String),

    #[error("non-finite coordinate at epoch {epoch}, edge {edge} ({head} -> {tail})")]
    NonFinite {
        epoch: usize,
        edge: usize,
        head: usize,
        tail: usize,
    },

    #[error("json: {0}")]
    Json(#[from] serde_json::Error),

    #[error("csv: {0}")]
    Csv(#[from] csv::Error),
}

impl Error {
    pub(crate) fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Error::Io {
            path: path.into(),
            source,
        }
    }
}
