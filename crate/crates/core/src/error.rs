use std::path::PathBuf;

use thiserror::Error;

/// Errors raised anywhere in the clustering pipeline.
#[derive(Debug, Error)]
pub enum Error {
    #[error("Schatten exponent p must lie in (0, 1], got {0}")]
    InvalidP(f64),

    #[error("Fourier-domain tensor is not conjugate symmetric (imaginary residue {residue:e})")]
    SymmetryViolation { residue: f64 },

    #[error("requested {m} anchors but only {n} samples are available")]
    TooManyAnchors { m: usize, n: usize },

    #[error("dense eigen-decomposition limited to {cap} nodes, graph has {size}")]
    SizeLimit { size: usize, cap: usize },

    #[error("label vectors differ in length: {truth} vs {pred}")]
    LengthMismatch { truth: usize, pred: usize },

    #[error("{file}:{line}:{column}: {message}")]
    Parse {
        file: PathBuf,
        line: usize,
        column: usize,
        message: String,
    },

    #[error("view {view} has {rows} rows but view 0 has {expected}")]
    ShapeMismatch {
        view: usize,
        rows: usize,
        expected: usize,
    },

    #[error("label file has {labels} entries but the views have {samples} samples")]
    LabelMismatch { labels: usize, samples: usize },

    #[error("invalid tensor: {0}")]
    InvalidTensor(String),

    #[error("invalid configuration: {0}")]
    InvalidConfig(String),

    #[error("non-finite values after iteration {iteration}")]
    NumericalBreakdown { iteration: usize },

    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
}

pub type Result<T, E = Error> = std::result::Result<T, E>;

impl Error {
    pub fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Error::Io {
            path: path.into(),
            source,
        }
    }
}
