use std::path::PathBuf;

use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("configuration error: {0}")]
    Config(String),

    #[error("fields live on different grids")]
    GridMismatch,

    #[error("negative initial data in {field} at cell {index}: {value:e}")]
    NegativeInitialData {
        field: &'static str,
        index: usize,
        value: f64,
    },

    #[error("non-finite value in {field} at cell {index}")]
    NonFinite { field: &'static str, index: usize },

    #[error("step rejected at t = {t:e} with dt = {dt:e}: {reason}")]
    StepRejected { t: f64, dt: f64, reason: String },

    #[error("time step underflow at t = {t:e}: dt = {dt:e} below dt_min = {dt_min:e}")]
    DtUnderflow { t: f64, dt: f64, dt_min: f64 },

    #[error("eta = {eta} is resolved by only {cells} cells (need at least {required})")]
    UnderresolvedEta {
        eta: f64,
        cells: usize,
        required: usize,
    },

    #[error("ell = {ell} violates the lower bound ell > {threshold}")]
    ConstraintViolated { ell: f64, threshold: f64 },

    #[error("domain error: {0}")]
    Domain(String),

    #[error("parse error at line {line}, column {column}: {message}")]
    Parse {
        line: usize,
        column: usize,
        message: String,
    },

    #[error("invalid configuration:\n  {}", .0.join("\n  "))]
    Validation(Vec<String>),

    #[error("I/O error on {path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
}

impl Error {
    pub(crate) fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Error::Io {
            path: path.into(),
            source,
        }
    }

    /// Process exit status: 1 for invalid input, 2 for runtime failures,
    /// 3 for I/O.
    pub fn exit_code(&self) -> i32 {
        match self {
            Error::StepRejected { .. } | Error::DtUnderflow { .. } => 2,
            Error::Io { .. } => 3,
            _ => 1,
        }
    }
}
