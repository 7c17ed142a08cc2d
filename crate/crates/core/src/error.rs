use thiserror::Error;

use crate::lp::{LpError, LpStatus};

#[derive(Debug, Error)]
pub enum Error {
    #[error(transparent)]
    Lp(#[from] LpError),
    #[error("invalid dataset: {0}")]
    InvalidDataset(String),
    #[error("invalid configuration: {0}")]
    InvalidConfig(String),
    #[error("expected {expected} features, got {got}")]
    Dimension { expected: usize, got: usize },
    #[error("class {class} has no samples")]
    EmptyClass { class: usize },
    #[error(
        "class {class} is absent from the training split of fold {fold}; \
         use a larger dataset or fewer folds"
    )]
    FoldMissingClass { fold: usize, class: usize },
    #[error("{context}: solver reported {status:?}")]
    UnexpectedStatus {
        context: &'static str,
        status: LpStatus,
    },
    #[error("run with seed {seed} failed: {source}")]
    RunFailed {
        seed: u64,
        #[source]
        source: Box<Error>,
    },
    #[error("{path}: line {line}, column {column}: {message}")]
    Parse {
        path: String,
        line: u64,
        column: usize,
        message: String,
    },
    #[error(transparent)]
    Csv(#[from] csv::Error),
    #[error(transparent)]
    Io(#[from] std::io::Error),
}

pub type Result<T, E = Error> = std::result::Result<T, E>;
