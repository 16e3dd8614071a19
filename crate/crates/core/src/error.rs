use std::path::PathBuf;

use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("line {line}: expected {expected} columns, found {found}")]
    Structure {
        line: u64,
        expected: usize,
        found: usize,
    },

    #[error("document has no header row")]
    MissingHeader,

    #[error("line {line}, column {column}: cannot parse {value:?} as a finite number")]
    Parse {
        line: u64,
        column: usize,
        value: String,
    },

    #[error("line {line}, column {column}: empty cell")]
    EmptyCell { line: u64, column: usize },

    #[error("line {line}, column {column}: negative value {value}")]
    Negative {
        line: u64,
        column: usize,
        value: String,
    },

    #[error("line {line}: duplicate district name {name:?}")]
    DuplicateDistrict { line: u64, name: String },

    #[error("precondition violated: {0}")]
    Precondition(String),

    #[error("domain error: {0}")]
    Domain(String),

    #[error("invalid configuration: {0}")]
    InvalidConfig(String),

    #[error("{path}, line {line}: {message}")]
    KeyValue {
        path: String,
        line: usize,
        message: String,
    },

    #[error("input not found: {}", .0.display())]
    InputNotFound(PathBuf),

    #[error("{}: {source}", path.display())]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    #[error("csv: {0}")]
    Csv(#[from] csv::Error),
}
