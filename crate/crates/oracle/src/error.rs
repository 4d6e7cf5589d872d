use thiserror::Error;

/// Failure modes of the reference solvers.
#[derive(Debug, Error)]
pub enum OracleError {
    /// The KKT system is singular: the constraints are degenerate or the
    /// problem has no unique finite solution.
    #[error("degenerate system: {0}")]
    Degenerate(String),

    /// The iterative reference solver failed to reach its target accuracy.
    #[error("oracle failed to converge after {iterations} iterations (residual {residual:.3e})")]
    NonConvergence { iterations: usize, residual: f64 },

    /// The instance exceeds the deliberate size guard for dense references.
    #[error("instance of size {n}x{d} exceeds the oracle guard ({max_n}x{max_d})")]
    TooLarge {
        n: usize,
        d: usize,
        max_n: usize,
        max_d: usize,
    },
}
