//! Library surface of the pipeline driver; the `stgan` binary is a thin
//! wrapper so integration tests can drive every stage in-process.

pub mod checkpoint;
pub mod cli;
pub mod config;
pub mod pipeline;
pub mod report;

use thiserror::Error;

#[derive(Error, Debug)]
pub enum CliError {
    /// Bad arguments or inputs; exit code 1.
    #[error("{0}")]
    Validation(String),
    /// Failure while running a stage; exit code 2.
    #[error("{0}")]
    Runtime(String),
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Validation(_) => 1,
            CliError::Runtime(_) => 2,
        }
    }

    pub fn validation(msg: impl Into<String>) -> CliError {
        CliError::Validation(msg.into())
    }

    pub fn runtime(msg: impl Into<String>) -> CliError {
        CliError::Runtime(msg.into())
    }
}

impl From<std::io::Error> for CliError {
    fn from(e: std::io::Error) -> Self {
        CliError::Runtime(format!("i/o error: {e}"))
    }
}

impl From<stgan::tensor::TensorError> for CliError {
    fn from(e: stgan::tensor::TensorError) -> Self {
        CliError::Runtime(e.to_string())
    }
}

impl From<stgan::skipthought::StError> for CliError {
    fn from(e: stgan::skipthought::StError) -> Self {
        CliError::Runtime(e.to_string())
    }
}

impl From<stgan::gan::GanError> for CliError {
    fn from(e: stgan::gan::GanError) -> Self {
        CliError::Runtime(e.to_string())
    }
}

impl From<stgan::corpus::CorpusError> for CliError {
    fn from(e: stgan::corpus::CorpusError) -> Self {
        CliError::Validation(e.to_string())
    }
}

impl From<stgan::metrics::MetricError> for CliError {
    fn from(e: stgan::metrics::MetricError) -> Self {
        CliError::Validation(e.to_string())
    }
}

impl From<stgan::embed::EmbedError> for CliError {
    fn from(e: stgan::embed::EmbedError) -> Self {
        CliError::Validation(e.to_string())
    }
}

pub type Result<T> = std::result::Result<T, CliError>;
