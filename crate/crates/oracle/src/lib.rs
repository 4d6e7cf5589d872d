//! Slow, dense, brute-force reference implementations used only by tests and
//! the verification suite. Nothing in this crate is performance-sensitive,
//! and nothing here imports solver internals from the rest of the workspace —
//! agreement between an oracle and a production path is evidence precisely
//! because the two share no code beyond the core containers.
//!
//! Provided oracles:
//! * equality-constrained quadratic minimization via a dense KKT system;
//! * high-accuracy p-norm regression by damped Newton with smoothing
//!   continuation;
//! * constrained minimization of smoothed p-th-power penalties;
//! * finite-difference gradients with Richardson extrapolation;
//! * dense linear-algebra helpers (pseudo-inverse, SVD leverage scores,
//!   generalized eigenvalue ranges);
//! * Chernoff tail helpers for calibrating randomized-test thresholds.

mod chernoff;
pub mod dense;
mod error;
mod fd;
mod gamma_min;
mod kkt;
mod pnorm;

pub use chernoff::{count_lower_bound, count_upper_bound, lower_tail_bound, upper_tail_bound};
pub use error::OracleError;
pub use fd::{finite_difference, FdGradient};
pub use gamma_min::{gamma_constrained_min, GammaMinSolution};
pub use kkt::{kkt_solve, KktSolution};
pub use pnorm::{pnorm_oracle, PnormSolution};
