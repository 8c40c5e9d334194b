use thiserror::Error;

/// Errors produced while ingesting matrices or transforming systems.
#[derive(Error, Debug)]
pub enum Error {
    /// Matrix Market input could not be parsed. Carries the 1-based line number.
    #[error("matrix market parse error at line {line}: {msg}")]
    Parse { line: usize, msg: String },

    /// An entry referenced a row or column outside the declared dimensions.
    #[error("entry at line {line} out of bounds: ({row}, {col}) not within {rows}x{cols}")]
    IndexOutOfBounds {
        line: usize,
        row: usize,
        col: usize,
        rows: usize,
        cols: usize,
    },

    /// The matrix is not square and cannot describe a triangular system.
    #[error("matrix is not square: {rows}x{cols}")]
    NotSquare { rows: usize, cols: usize },

    /// A row has a structurally missing or numerically zero diagonal.
    #[error("row {row} has a zero or missing diagonal")]
    ZeroDiagonal { row: usize },

    /// A right-hand-side file does not match the system dimension.
    #[error("right-hand side has {got} values, expected {expected}")]
    RhsLength { got: usize, expected: usize },

    /// A schedule, system or plan does not belong to the same structure.
    #[error("inconsistent inputs: {0}")]
    Mismatch(String),

    /// An internal consistency check failed; the transform state is unusable.
    #[error("internal consistency failure: {0}")]
    Internal(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),
}

pub type Result<T> = std::result::Result<T, Error>;
