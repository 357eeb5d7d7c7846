use thiserror::Error;

/// Errors raised by game construction, parsing and the chart machinery.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("shape mismatch: {0}")]
    ShapeMismatch(String),

    #[error("non-finite utility entry in tensor of player {player} at flat index {index}")]
    NonFinite { player: usize, index: usize },

    #[error("line {line}: {message}")]
    Syntax { line: usize, message: String },

    #[error("dimension mismatch: expected {expected}, got {got}")]
    DimensionMismatch { expected: usize, got: usize },

    #[error("invalid index: {0}")]
    InvalidIndex(String),

    #[error("point lies on the hyperplane at infinity of chart component {player} (coordinate {index} is zero)")]
    DivisionByZero { player: usize, index: usize },

    #[error("chart {chart} excludes hypersurface {hypersurface}: it lies in the chart complement")]
    ChartExcludesHypersurface { chart: String, hypersurface: String },

    #[error("invalid family: {0}")]
    InvalidFamily(String),

    #[error("{0}")]
    Usage(String),
}

pub type Result<T> = std::result::Result<T, Error>;
