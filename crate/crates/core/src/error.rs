use std::path::PathBuf;

use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("{}: {source}", path.display())]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    /// Positions are 1-based line and field numbers of the source file.
    #[error("cannot parse cell at ({row}, {col}): {text:?}")]
    Parse { row: usize, col: usize, text: String },

    #[error("ragged input: line {row} has {found} cells, expected {expected}")]
    Ragged { row: usize, expected: usize, found: usize },

    #[error("non-finite value at ({row}, {col})")]
    NonFinite { row: usize, col: usize },

    #[error("invalid shape: {0}")]
    Shape(String),

    #[error("non-positive price {value} for series {series} at time {time}")]
    NonPositivePrice { series: usize, time: usize, value: f64 },

    #[error("lag {lag} leaves fewer than two overlapping samples (N = {n})")]
    LagTooLarge { lag: usize, n: usize },

    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("leading block is numerically singular")]
    Singular,

    #[error("{algorithm} did not settle within {cap} passes")]
    IterationCap { algorithm: &'static str, cap: usize },

    #[error("series has zero variance")]
    ZeroVariance,

    #[error("dimension mismatch: {0}")]
    DimensionMismatch(String),

    #[error("empty evaluation window")]
    EmptyWindow,

    #[error("insufficient data: {0}")]
    InsufficientData(String),
}
