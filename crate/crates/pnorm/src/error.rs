//! Error type for the outer solvers.

use linear_solvers::LinearSolverError;
use residual::ResidualError;
use thiserror::Error;

/// Failures surfaced by the outer p-norm solvers.
#[derive(Debug, Error)]
pub enum PnormError {
    /// The linear constraint system admits no solution (or the feasible
    /// start could not be constructed to tolerance).
    #[error("infeasible constraints: {0}")]
    Infeasible(String),

    /// A homotopy phase failed to reach its tolerance even after the
    /// retry with a halved step cap.
    #[error("phase {phase} stalled after {iterations} inner iterations")]
    PhaseStalled { phase: usize, iterations: usize },

    /// The problem shape and the requested method disagree (for example a
    /// homotopy solve of a constrained problem).
    #[error("unsupported configuration: {0}")]
    Unsupported(String),

    /// The dual solution collapsed, so no primal point can be recovered.
    #[error("degenerate dual solution: {0}")]
    DegenerateDual(String),

    /// A failure in the budgeted-step machinery.
    #[error(transparent)]
    Residual(#[from] ResidualError),

    /// A failure in the linear-algebra layer.
    #[error(transparent)]
    Solver(#[from] LinearSolverError),
}
