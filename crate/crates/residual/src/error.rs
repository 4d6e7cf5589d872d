//! Error type for the residual-subproblem solvers.

use linear_solvers::LinearSolverError;
use thiserror::Error;

/// Failures surfaced by the weighted solves and the outer iteration.
#[derive(Debug, Error)]
pub enum ResidualError {
    /// The gradient direction lies (numerically) in the row space of the
    /// constraint matrix, so no feasible step can meet a nonzero budget:
    /// the Schur complement `gᵀR⁻¹g − (AᵀR⁻¹g)ᵀ·v̂` collapsed to zero.
    #[error(
        "gradient lies in the constraint row space (schur {schur:.3e} \
         below threshold {threshold:.3e})"
    )]
    GradientInRowSpace {
        /// The collapsed Schur complement value.
        schur: f64,
        /// The degeneracy threshold it fell under.
        threshold: f64,
    },

    /// The constraint or budget residual of a weighted solve stayed above
    /// tolerance after all refinement attempts.
    #[error(
        "weighted solve missed tolerance {tolerance:.3e}: constraint \
         residual {constraint_residual:.3e}, budget residual \
         {budget_residual:.3e}"
    )]
    AccuracyNotMet {
        /// Achieved `‖AᵀΔ‖₂ / ‖Δ‖₂`.
        constraint_residual: f64,
        /// Achieved `|gᵀΔ − z| / |z|`.
        budget_residual: f64,
        /// The tolerance both were required to meet.
        tolerance: f64,
    },

    /// An underlying linear-algebra failure (divergence, rank deficiency,
    /// rebuild refusal) that the residual layer cannot recover from.
    #[error("linear solver failed: {0}")]
    Solver(#[from] LinearSolverError),
}
