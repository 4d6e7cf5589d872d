use thiserror::Error;

/// Errors produced by the core containers and I/O routines.
#[derive(Debug, Error)]
pub enum SparseCoreError {
    /// A triplet addressed a position outside the declared matrix shape.
    #[error("triplet ({row}, {col}) lies outside a {n_rows}x{n_cols} matrix")]
    TripletOutOfRange {
        row: usize,
        col: usize,
        n_rows: usize,
        n_cols: usize,
    },

    /// An operand's length does not match the matrix dimension it is used
    /// against.
    #[error("dimension mismatch in {context}: expected {expected}, got {got}")]
    DimensionMismatch {
        context: &'static str,
        expected: usize,
        got: usize,
    },

    /// The normal-equation matrix is numerically singular; the payload
    /// reports how many iterations ran before the breakdown was detected.
    #[error("matrix is rank deficient (detected after {iterations} iterations)")]
    RankDeficient { iterations: usize },

    /// Underlying file-system failure.
    #[error("i/o failure: {0}")]
    Io(#[from] std::io::Error),

    /// A text input could not be parsed; `line` is 1-based.
    #[error("parse error at line {line}: {message}")]
    Parse { line: usize, message: String },
}
