//! The serialized result of an outer solve.

use serde::{Deserialize, Serialize};

/// Version stamp for the serialized report layout.
pub const REPORT_SCHEMA_VERSION: u32 = 1;

/// Everything a solve reports back, serializable as JSON.
///
/// `objective` always equals the objective recomputed from `solution`
/// (the constructor path evaluates it from the final iterate), and
/// `certified_gap` is relative to `lower_bound`:
/// `(objective − lower_bound)/lower_bound`, infinite when no positive
/// lower bound was established.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct SolveReport {
    /// Layout version of this struct.
    pub schema_version: u32,
    /// Problem form tag: `"p1"` (image) or `"p2"` (kernel).
    pub form: String,
    /// Which route produced the solution.
    pub method: String,
    /// Norm exponent.
    pub p: f64,
    /// The solution vector.
    pub solution: Vec<f64>,
    /// Objective value at `solution`.
    pub objective: f64,
    /// Best certified lower bound on the optimum (`-inf`-free; equals
    /// `objective` when the solve is exact).
    pub lower_bound: f64,
    /// Relative optimality gap certified against `lower_bound`.
    pub certified_gap: f64,
    /// Outer iterations performed.
    pub iterations: usize,
    /// Inner model solves (budgeted-step searches, Newton maximizations,
    /// or homotopy phases) performed.
    pub residual_calls: usize,
    /// Wall-clock seconds spent inside the solver.
    pub wall_seconds: f64,
    /// Seed all randomness flowed from.
    pub seed: u64,
    /// Largest linear-constraint violation at `solution`.
    pub constraint_violation: f64,
    /// Certified absolute gap bound recorded at each outer iteration.
    pub gap_history: Vec<f64>,
    /// Objective value recorded at each outer iteration (nonincreasing).
    pub objective_history: Vec<f64>,
}

impl SolveReport {
    /// Relative certified gap for a (objective, lower bound) pair:
    /// zero when both are nonpositive-tiny, infinite when the lower
    /// bound is not positive, the plain ratio otherwise.
    #[must_use]
    pub fn relative_gap(objective: f64, lower_bound: f64) -> f64 {
        if lower_bound > 0.0 {
            ((objective - lower_bound) / lower_bound).max(0.0)
        } else if objective.abs() <= f64::EPSILON {
            0.0
        } else {
            f64::INFINITY
        }
    }
}
