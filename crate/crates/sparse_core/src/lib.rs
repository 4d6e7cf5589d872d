//! Core containers and utilities shared by every crate in the workspace:
//! compressed sparse row (CSR) matrices, a small row-major dense matrix,
//! a deterministic seeded random number generator, spectral condition-number
//! estimation, and Matrix Market / vector file I/O.
//!
//! The CSR layout is the canonical one:
//!
//! ```text
//! row_offsets : n_rows + 1 monotone offsets into col_indices / values
//! col_indices : column of each stored entry, strictly increasing within a row
//! values      : the stored entries; no explicit zeros, no duplicates
//! ```
//!
//! All randomized code in the workspace draws from [`SeededRng`], which is
//! fully determined by a 64-bit seed and a 64-bit stream id, so identical
//! `(seed, stream)` pairs produce identical draws on every platform.

mod condition;
mod dense;
mod error;
mod io;
mod matrix;
mod rng;

pub use condition::{condition_number_estimate, ConditionEstimate};
pub use dense::DenseMatrix;
pub use error::SparseCoreError;
pub use io::{
    read_matrix_market, read_vector, write_matrix_market, write_vector,
};
pub use matrix::SparseMatrix;
pub use rng::SeededRng;
