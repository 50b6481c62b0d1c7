use std::path::PathBuf;

use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid size: {0}")]
    InvalidSize(String),

    #[error("domain error: {0}")]
    Domain(String),

    #[error("unsupported graph structure: {0}")]
    UnsupportedStructure(String),

    #[error("degenerate spectrum: {0}")]
    DegenerateSpectrum(String),

    #[error("shape mismatch: {0}")]
    Shape(String),

    #[error("filter degree {degree} must be below vertex count {n}")]
    Degree { degree: usize, n: usize },

    #[error("numerical failure: {0}")]
    Numerical(String),

    #[error("spectral/vertex duality violated: imaginary residue {residue:e} exceeds {tol:e}")]
    DualityViolation { residue: f64, tol: f64 },

    #[error("empty batch: {0}")]
    EmptyBatch(String),

    #[error("contract violation: {0}")]
    Contract(String),

    #[error("non-finite value in {0}")]
    NumericHealth(String),

    #[error("invalid model spec: {0}")]
    Spec(String),

    #[error("projection vector has zero norm")]
    DegenerateProjection,

    #[error("empty graph: {0}")]
    EmptyGraph(String),

    #[error("degenerate graph: {0}")]
    DegenerateGraph(String),

    #[error("labeling error: {0}")]
    Labeling(String),

    #[error("edge entropy needs at least two classes")]
    SingleClass,

    #[error("{}:{line}: {msg}", file.display())]
    Parse {
        file: PathBuf,
        line: usize,
        msg: String,
    },

    #[error("{}: {source}", path.display())]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    #[error("configuration error: {0}")]
    Config(String),

    #[error("fold error: {0}")]
    Fold(String),
}

impl Error {
    pub(crate) fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Error::Io {
            path: path.into(),
            source,
        }
    }

    pub(crate) fn parse(file: impl Into<PathBuf>, line: usize, msg: impl Into<String>) -> Self {
        Error::Parse {
            file: file.into(),
            line,
            msg: msg.into(),
        }
    }

    /// True for failures caused by input data (missing files, malformed text).
    pub fn is_data_error(&self) -> bool {
        matches!(self, Error::Parse { .. } | Error::Io { .. } | Error::Labeling(_))
    }

    /// True for failures caused by floating point breakdown.
    pub fn is_numeric_error(&self) -> bool {
        matches!(
            self,
            Error::NumericHealth(_)
                | Error::Numerical(_)
                | Error::DualityViolation { .. }
                | Error::DegenerateSpectrum(_)
        )
    }
}
