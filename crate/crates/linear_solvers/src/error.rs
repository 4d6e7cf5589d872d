//! Error type shared by the solver building blocks.

use thiserror::Error;

/// Errors reported by inverse operators, inverse maintenance, and the
/// preconditioned Richardson iteration.
#[derive(Debug, Error)]
pub enum LinearSolverError {
    /// The normal-equations matrix is singular to working precision.
    #[error("rank-deficient system: {context}")]
    RankDeficient {
        /// Where the singularity surfaced.
        context: &'static str,
    },

    /// An iterative build could not certify the requested accuracy.
    #[error(
        "inverse operator accuracy not met: requested {requested:.3e}, \
         achieved {achieved:.3e}"
    )]
    AccuracyNotMet {
        /// The tolerance the caller asked for.
        requested: f64,
        /// The calibrated accuracy actually reached.
        achieved: f64,
    },

    /// A low-rank update was rejected because its inner system is too close
    /// to singular; the caller must rebuild the factorization instead.
    #[error(
        "low-rank update rejected (inner system condition {condition:.3e}); \
         rebuild required"
    )]
    RebuildRequired {
        /// Condition-number estimate of the inner update system.
        condition: f64,
    },

    /// Richardson iteration failed to reach the target within its budget.
    #[error("iteration diverged after {iterations} steps")]
    Diverged {
        /// Iterations performed before giving up.
        iterations: usize,
        /// Relative residual after each iteration.
        history: Vec<f64>,
    },
}
