//! Error type for score estimation and spectral approximation.

use linear_solvers::LinearSolverError;
use thiserror::Error;

/// Errors surfaced by the sampling and approximation routines.
#[derive(Debug, Error)]
pub enum LeverageError {
    /// A sampled submatrix stayed rank-deficient through every retry.
    #[error(
        "sampling round {round} stayed rank-deficient after {attempts} \
         attempts with doubled rates"
    )]
    RetriesExhausted {
        /// Round index (the final sample reports the round count).
        round: usize,
        /// Attempts made, including the first.
        attempts: usize,
    },

    /// A factorization failed for a reason other than a retryable sample.
    #[error("solver error: {0}")]
    Solver(#[from] LinearSolverError),
}
