//! Budgeted smoothed-residual subproblems and their reweighted solver.
//!
//! The crate solves
//!
//! ```text
//! minimize  Σᵢ γ_p(tᵢ, Δᵢ)    subject to    AᵀΔ = 0,   gᵀΔ = z,
//! ```
//!
//! for `p ≥ 2` via iteratively reweighted least squares with monotone
//! weights, and recovers the unbudgeted maximization
//! `gᵀΔ − c(p)·Σγ_p(t, Δ)` by scanning the budget over a geometric grid.
//! The inverse behind the weighted solves is maintained across iterations
//! with low-rank row updates scheduled by dyadic change counters, plus
//! periodic full rebuilds.
//!
//! Layout:
//! - [`residual_gradient`]: gradient of `‖Ax − b‖_p^p` in the residual.
//! - [`solve_weighted_lr`]: one budgeted, kernel-constrained weighted
//!   least-squares step.
//! - [`solve_residual`]: the reweighted outer loop on a normalized
//!   instance.
//! - [`approx_via_z_search`]: budget scan for the unbudgeted form.

mod error;
mod gradient;
mod outer;
mod problem;
mod state;
mod weighted;
mod zsearch;

pub use error::ResidualError;
pub use gradient::{residual_gradient, GRADIENT_MAGNITUDE_FLOOR};
pub use outer::{
    solve_residual, AuditRecord, MaintenanceEvent, ResidualAudit,
    ResidualOutcome, AUDIT_DIMENSION_CAP,
};
pub use problem::{ResidualConfig, ResidualParameters, ResidualProblem};
pub use state::WeightState;
pub use weighted::{
    solve_weighted_lr, WeightedLrSolution, SCHUR_DEGENERACY_THRESHOLD,
};
pub use zsearch::{
    approx_via_z_search, ZProbe, ZSearchConfig, ZSearchOutcome,
};
