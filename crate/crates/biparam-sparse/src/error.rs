use thiserror::Error;

/// Errors surfaced by grid, transform, and selection operations.
#[derive(Debug, Error)]
pub enum Error {
    /// A requested interval or rectangle is finer than the grid resolves.
    #[error("resolution exceeded: depth {requested} > max depth {max}")]
    ResolutionExceeded { requested: u32, max: u32 },

    /// Two objects that must share a grid do not.
    #[error("grid mismatch: {0}")]
    GridMismatch(String),

    /// A weight has a nonpositive (or non-finite) cell value.
    #[error("invalid weight: cell {cell} has value {value}")]
    InvalidWeight { cell: usize, value: f64 },

    /// A parameter is outside its admissible range.
    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    /// A quantity that must be nonzero (e.g. an L1 norm) vanished.
    #[error("degenerate input: {0}")]
    DegenerateInput(String),

    /// Serialization or file-format failure.
    #[error("format error: {0}")]
    Format(String),
}

pub type Result<T> = std::result::Result<T, Error>;
