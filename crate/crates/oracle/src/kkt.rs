//! Dense reference for the equality-constrained weighted least-squares
//! subproblem
//!
//! ```text
//! minimize   ½ Δᵀ diag(r) Δ
//! subject to AᵀΔ = 0,  gᵀΔ = z
//! ```
//!
//! solved by assembling and factoring the full KKT system — no iterative
//! shortcuts, no preconditioning.

use nalgebra::{DMatrix, DVector};
use sparse_core::SparseMatrix;

use crate::{dense, OracleError};

/// Size guard: the dense KKT system refuses instances with more rows.
pub const MAX_ROWS: usize = 500;

/// Output of [`kkt_solve`].
#[derive(Debug, Clone)]
pub struct KktSolution {
    /// The minimizer Δ*.
    pub delta: Vec<f64>,
    /// Objective value ½ Δᵀ diag(r) Δ at the minimizer.
    pub objective: f64,
    /// Max-norm of the stationarity and constraint residuals of the solved
    /// KKT system.
    pub residual: f64,
    /// Certified tolerance of the reference (residual-based).
    pub tolerance: f64,
    /// Method tag.
    pub method: &'static str,
}

/// Solves `min ½ Δᵀdiag(r)Δ  s.t. AᵀΔ = 0, gᵀΔ = z` by a dense KKT
/// factorization. Pass `None` for `a` to drop the `AᵀΔ = 0` block.
///
/// # Errors
/// [`OracleError::Degenerate`] when the KKT matrix is singular (e.g. `g`
/// lies in the span of `A`'s columns, making `gᵀΔ = z` unreachable in the
/// null space), and [`OracleError::TooLarge`] past the size guard.
///
/// # Panics
/// Panics if dimensions are inconsistent or any `r` entry is not positive.
pub fn kkt_solve(
    r: &[f64],
    a: Option<&SparseMatrix>,
    g: &[f64],
    z: f64,
) -> Result<KktSolution, OracleError> {
    let n = r.len();
    assert_eq!(g.len(), n, "g must have one entry per coordinate of Δ");
    assert!(r.iter().all(|&w| w > 0.0), "weights must be positive");
    let d = a.map_or(0, SparseMatrix::n_cols);
    if let Some(a) = a {
        assert_eq!(a.n_rows(), n, "constraint matrix must have n rows");
    }
    if n > MAX_ROWS {
        return Err(OracleError::TooLarge {
            n,
            d,
            max_n: MAX_ROWS,
            max_d: MAX_ROWS,
        });
    }

    // KKT system over (Δ, ν, μ):
    //   [ diag(r)  A   g ] [Δ]   [0]
    //   [ Aᵀ       0   0 ] [ν] = [0]
    //   [ gᵀ       0   0 ] [μ]   [z]
    let size = n + d + 1;
    let mut k = DMatrix::<f64>::zeros(size, size);
    for i in 0..n {
        k[(i, i)] = r[i];
    }
    if let Some(a) = a {
        let ad = dense::to_dmatrix(a);
        for i in 0..n {
            for j in 0..d {
                k[(i, n + j)] = ad[(i, j)];
                k[(n + j, i)] = ad[(i, j)];
            }
        }
    }
    for i in 0..n {
        k[(i, n + d)] = g[i];
        k[(n + d, i)] = g[i];
    }
    let mut rhs = DVector::zeros(size);
    rhs[n + d] = z;

    let lu = k.clone().lu();
    let sol = lu.solve(&rhs).ok_or_else(|| {
        OracleError::Degenerate("KKT matrix is singular".to_string())
    })?;

    let residual_vec = &k * &sol - &rhs;
    let residual = residual_vec.amax();
    let scale = k.amax().max(z.abs()).max(1.0);
    if !residual.is_finite() || residual > 1e-8 * scale {
        return Err(OracleError::Degenerate(format!(
            "KKT solve residual {residual:.3e} too large relative to scale {scale:.3e}"
        )));
    }

    let delta: Vec<f64> = sol.as_slice()[..n].to_vec();
    let objective = 0.5
        * delta
            .iter()
            .zip(r)
            .map(|(x, w)| w * x * x)
            .sum::<f64>();
    Ok(KktSolution {
        delta,
        objective,
        residual,
        tolerance: 1e-10,
        method: "dense-kkt-lu",
    })
}
