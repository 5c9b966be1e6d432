use std::path::PathBuf;

use thiserror::Error;

#[derive(Debug, Error)]
pub enum StreamError {
    #[error("line {line}: self-loop on vertex {vertex}")]
    SelfLoop { line: u64, vertex: u64 },
    #[error("line {line}: cannot parse token {token:?}")]
    Parse { line: u64, token: String },
    #[error("line {line}: expected 2 or 3 tokens, found {found}")]
    TokenCount { line: u64, found: usize },
    #[error("line {line}: no timestamp for timestamp ordering")]
    MissingTimestamp { line: u64 },
    #[error("cannot shuffle an unbounded source")]
    Unbounded,
    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
}

#[derive(Debug, Error, PartialEq)]
pub enum DomainError {
    #[error("{0}")]
    Invalid(String),
}

impl DomainError {
    pub(crate) fn new(msg: impl Into<String>) -> Self {
        DomainError::Invalid(msg.into())
    }
}

#[derive(Debug, Error)]
pub enum Error {
    #[error(transparent)]
    Stream(#[from] StreamError),
    #[error(transparent)]
    Domain(#[from] DomainError),
    #[error("config: {0}")]
    Config(String),
    #[error("oracle: {0}")]
    Oracle(String),
    #[error("io: {0}")]
    Io(#[from] std::io::Error),
    #[error("csv: {0}")]
    Csv(#[from] csv::Error),
}

pub type Result<T> = std::result::Result<T, Error>;
