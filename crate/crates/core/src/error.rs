use thiserror::Error;

#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid instance: {0}")]
    InvalidInstance(String),

    #[error("line {line}: {message}")]
    Parse { line: usize, message: String },

    #[error("no path from node {source_node} to node {sink}")]
    Disconnected { source_node: usize, sink: usize },

    #[error("vector has length {got}, expected {expected}")]
    Dimension { expected: usize, got: usize },

    #[error("enumeration guard exceeded: {0} candidate sets")]
    EnumerationGuard(u64),

    #[error("invalid settings string {0:?}")]
    Settings(String),

    #[error("artificial bound {level} must exceed {theta}")]
    InvalidLevel { level: i64, theta: i64 },

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Csv(#[from] csv::Error),
}

pub type Result<T, E = Error> = std::result::Result<T, E>;
