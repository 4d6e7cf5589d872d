//! Linear-system building blocks for the regression solvers: an abstract
//! inverse-operator contract with calibrated accuracy, Sherman–Morrison–
//! Woodbury inverse maintenance under drifting diagonal weights, and
//! preconditioned Richardson iteration on the normal equations.
//!
//! The central contract: an [`InverseOperator`] built for `AᵀWA` applies the
//! inverse within a *measured* relative error ε, reported as
//! [`InverseOperator::error_bound`]. Everything downstream (Richardson
//! budgets, maintained-inverse bands) is stated in terms of that ε and the
//! multiplicative band `λ` between the preconditioner and the current
//! normal matrix:
//!
//! ```text
//! AᵀA ⪯ M ⪯ λ·AᵀA   ⇒   error contracts by (1 − 1/λ) per iteration.
//! ```

mod error;
mod inverse;
mod maintained;
mod richardson;

pub use error::LinearSolverError;
pub use inverse::{
    build_inverse_operator, ApplyInverse, BuildCostReport, InverseOperator,
    DEFAULT_TOL_DENSE, DEFAULT_TOL_ITERATIVE, DENSE_THRESHOLD,
};
pub use maintained::{
    smw_correction, MaintainedInverse, UpdateRecord, UPDATE_CONDITION_LIMIT,
};
pub use richardson::{richardson_solve, RichardsonSolve, StoppingRule};
