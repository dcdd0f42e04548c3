use std::path::PathBuf;

use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("domain error in {op}: {msg}")]
    Domain { op: &'static str, msg: String },

    #[error("invalid parameter {name} = {value}: {reason}")]
    InvalidParam {
        name: &'static str,
        value: f64,
        reason: &'static str,
    },

    #[error("singular information matrix: weakest direction loads on {direction} (smallest eigenvalue {eigenvalue:.3e})")]
    Singular { direction: String, eigenvalue: f64 },

    #[error("rank deficient design: column(s) {columns:?} are collinear with the rest")]
    RankDeficient { columns: Vec<String> },

    #[error("schema error in {file}: missing column {column}")]
    MissingColumn { file: PathBuf, column: String },

    #[error("no occupations matched across inputs ({diagnostics})")]
    EmptyMerge { diagnostics: String },

    #[error("config error at {path}: {msg}")]
    Config { path: String, msg: String },

    #[error("{0}")]
    Data(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Csv(#[from] csv::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

impl Error {
    pub(crate) fn domain(op: &'static str, msg: impl Into<String>) -> Self {
        Error::Domain {
            op,
            msg: msg.into(),
        }
    }
}
