use std::path::PathBuf;

use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("document is empty or contains only whitespace")]
    EmptyDocument,

    #[error("retention mask filters every subsequence")]
    EmptyRetention,

    #[error("invalid configuration: {0}")]
    InvalidConfig(String),

    #[error("dataset must contain both classes: {0}")]
    DegenerateDataset(String),

    #[error("non-finite value at feature index {feature_index}: {context}")]
    Numerical { feature_index: usize, context: String },

    #[error("external detector protocol violation: {0}")]
    AdapterProtocol(String),

    #[error("model file format error: {0}")]
    ModelFormat(String),

    #[error("unsupported combination: {0}")]
    UnsupportedCombination(String),

    #[error("invalid filter specification: {0}")]
    InvalidFilterSpec(String),

    #[error("malformed corpus line {line} in {path}: {message}")]
    Corpus {
        path: PathBuf,
        line: usize,
        message: String,
    },

    #[error(transparent)]
    Io(#[from] std::io::Error),
}

impl Error {
    pub(crate) fn config(msg: impl Into<String>) -> Self {
        Error::InvalidConfig(msg.into())
    }
}
