use std::path::PathBuf;

use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("i/o error on {path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    #[error("csv error in {path}: {source}")]
    Csv {
        path: PathBuf,
        #[source]
        source: csv::Error,
    },

    /// A cell that could not be interpreted. Rows are 1-based data rows
    /// (the header is row 0).
    #[error("{path}: cannot parse row {row}, column '{column}': {message}")]
    Parse {
        path: PathBuf,
        row: usize,
        column: String,
        message: String,
    },

    #[error("insufficient data: {0}")]
    InsufficientData(String),

    #[error("invalid input: {0}")]
    InvalidInput(String),

    #[error("invalid parameters: {0}")]
    InvalidParameters(String),

    #[error("non-finite value: {0}")]
    NonFinite(String),

    #[error("non-finite objective at finite-difference probe {probe:?} (parameter {index})")]
    NonFiniteProbe { index: usize, probe: Vec<f64> },

    #[error(
        "information matrix singular near optimum (min eigenvalue {min_eigenvalue:e}, \
         max eigenvalue {max_eigenvalue:e})"
    )]
    SingularInformation {
        min_eigenvalue: f64,
        max_eigenvalue: f64,
    },

    #[error("rank-deficient regressor matrix: column '{column}' is collinear with earlier columns")]
    Collinear { column: String },

    #[error("optimizer did not converge: {0}")]
    NonConvergence(String),
}

impl Error {
    pub(crate) fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Error::Io {
            path: path.into(),
            source,
        }
    }
}
