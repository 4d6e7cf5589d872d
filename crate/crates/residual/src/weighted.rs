//! Weighted least-squares step with a kernel constraint and a budget:
//!
//! ```text
//! minimize  ΔᵀRΔ   subject to   AᵀΔ = 0,   gᵀΔ = z,
//! ```
//!
//! with `R` a positive diagonal. Eliminating the multipliers gives the
//! closed form
//!
//! ```text
//! v̂ = (AᵀR⁻¹A)⁻¹ AᵀR⁻¹g,        s = gᵀR⁻¹g − (AᵀR⁻¹g)ᵀ v̂,
//! Δ = (z/s) · (R⁻¹g − R⁻¹A v̂),
//! ```
//!
//! where `v̂` is obtained by preconditioned first-order iteration on the
//! row-scaled matrix `R^{−1/2}A` and `s` is the Schur complement of the
//! budget row. Because `s` is computed from the same `v̂` that enters `Δ`,
//! the budget `gᵀΔ = z` holds to round-off regardless of how accurately
//! `v̂` solves its system; only the kernel constraint inherits the
//! iteration's residual.

use linear_solvers::{
    richardson_solve, ApplyInverse, MaintainedInverse, StoppingRule,
};
use sparse_core::SparseMatrix;

use crate::error::ResidualError;

/// Relative Schur-complement size below which the gradient is declared to
/// lie in the constraint row space.
pub const SCHUR_DEGENERACY_THRESHOLD: f64 = 1e-12;

/// A solved weighted step.
#[derive(Debug, Clone)]
pub struct WeightedLrSolution {
    /// The minimizer Δ.
    pub delta: Vec<f64>,
    /// The eliminated constraint multiplier `v̂` (empty without constraints).
    pub multiplier: Vec<f64>,
    /// Schur complement `s = gᵀR⁻¹g − (AᵀR⁻¹g)ᵀ v̂`.
    pub schur: f64,
    /// Inner iterations spent across refinement attempts.
    pub iterations: usize,
}

/// Applies a scalar multiple of another inverse operator; used to turn the
/// maintained inverse of `AᵀR̂⁻¹A` into a preconditioner for `AᵀR⁻¹A` when
/// the bands `R` and `R̂` agree within a known factor.
struct ScaledApply<'a> {
    inner: &'a dyn ApplyInverse,
    factor: f64,
}

impl ApplyInverse for ScaledApply<'_> {
    fn dim(&self) -> usize {
        self.inner.dim()
    }

    fn apply(&self, rhs: &[f64]) -> Vec<f64> {
        let mut out = self.inner.apply(rhs);
        for v in &mut out {
            *v *= self.factor;
        }
        out
    }
}

/// Solves the budgeted weighted least-squares step above.
///
/// `a` is the optional constraint matrix; when present, `inv` must hold a
/// maintained inverse of `Aᵀ diag(1/r̂) A` whose reference band `r̂` may
/// differ from `r` — the preconditioner quality is taken from the band
/// ratio. Without constraints the minimizer is the closed form
/// `Δ = (z / gᵀR⁻¹g) · R⁻¹g`.
///
/// # Errors
/// [`ResidualError::GradientInRowSpace`] when the Schur complement
/// collapses, [`ResidualError::AccuracyNotMet`] when refinement cannot meet
/// `tol`, and [`ResidualError::Solver`] for inner iteration failures.
///
/// # Panics
/// Panics on dimension mismatches, non-positive `r`, non-finite `z`, or a
/// missing maintained inverse when a constraint matrix is supplied.
pub fn solve_weighted_lr(
    a: Option<&SparseMatrix>,
    r: &[f64],
    g: &[f64],
    z: f64,
    inv: Option<&MaintainedInverse>,
    tol: f64,
) -> Result<WeightedLrSolution, ResidualError> {
    let n = r.len();
    assert_eq!(g.len(), n, "gradient length {} != band length {n}", g.len());
    assert!(
        r.iter().all(|&ri| ri > 0.0 && ri.is_finite()),
        "band diagonal must be positive and finite"
    );
    assert!(z.is_finite(), "budget must be finite, got {z}");
    assert!(tol > 0.0 && tol < 1.0, "tolerance must lie in (0, 1), got {tol}");
    if let Some(mat) = a {
        assert_eq!(mat.n_rows(), n, "constraint rows {} != band length {n}", mat.n_rows());
        assert!(
            inv.is_some(),
            "a maintained inverse is required alongside a constraint matrix"
        );
    }

    if z == 0.0 {
        return Ok(WeightedLrSolution {
            delta: vec![0.0; n],
            multiplier: Vec::new(),
            schur: 0.0,
            iterations: 0,
        });
    }

    // gᵀR⁻¹g and R⁻¹g.
    let rinv_g: Vec<f64> = g.iter().zip(r).map(|(&gi, &ri)| gi / ri).collect();
    let gr: f64 = g.iter().zip(&rinv_g).map(|(&gi, &hi)| gi * hi).sum();
    if gr <= 0.0 {
        return Err(ResidualError::GradientInRowSpace {
            schur: gr,
            threshold: SCHUR_DEGENERACY_THRESHOLD,
        });
    }

    let Some(mat) = a else {
        // Unconstrained: Δ = (z / gᵀR⁻¹g) · R⁻¹g.
        let scale = z / gr;
        return Ok(WeightedLrSolution {
            delta: rinv_g.iter().map(|&hi| scale * hi).collect(),
            multiplier: Vec::new(),
            schur: gr,
            iterations: 0,
        });
    };
    let operator = inv.expect("checked above");

    // Row-scaled system: A' = R^{−1/2}A, b' = R^{−1/2}g, so that
    // A'ᵀA' v = A'ᵀ b' is exactly AᵀR⁻¹A v = AᵀR⁻¹g.
    let inv_sqrt: Vec<f64> = r.iter().map(|&ri| 1.0 / ri.sqrt()).collect();
    let scaled = mat.scale_rows(&inv_sqrt);
    let rhs: Vec<f64> = g.iter().zip(&inv_sqrt).map(|(&gi, &si)| gi * si).collect();

    // Preconditioner: M⁻¹ = (1/λ_band)·(AᵀR̂⁻¹A)⁻¹ satisfies
    // A'ᵀA' ⪯ M ⪯ λ_band²·A'ᵀA' up to the operator's own error bound.
    let band = operator.band_width(r);
    let slack = 1.0 + 10.0 * operator.base_error_bound();
    let lambda = band * band * slack;
    let precond = ScaledApply {
        inner: operator,
        factor: 1.0 / band,
    };

    let mut inner_tol = (tol * 1e-2).clamp(1e-14, 0.5);
    let mut iterations = 0;
    let mut last_miss = (f64::INFINITY, f64::INFINITY);
    for _attempt in 0..3 {
        let solve = richardson_solve(
            &scaled,
            &rhs,
            &precond,
            lambda,
            &StoppingRule::new(inner_tol),
        )?;
        iterations += solve.iterations;
        let v_hat = solve.x;

        // Schur complement from the same v̂ that forms Δ.
        let mut atrg = vec![0.0; mat.n_cols()];
        mat.mul_vec_t(&rinv_g, &mut atrg);
        let schur = gr - dot(&atrg, &v_hat);
        if !(schur > SCHUR_DEGENERACY_THRESHOLD * gr) {
            return Err(ResidualError::GradientInRowSpace {
                schur,
                threshold: SCHUR_DEGENERACY_THRESHOLD * gr,
            });
        }

        let nu = z / schur;
        let mut av = vec![0.0; n];
        mat.mul_vec(&v_hat, &mut av);
        let delta: Vec<f64> = (0..n)
            .map(|i| nu * (g[i] - av[i]) / r[i])
            .collect();

        // Verify the posts; tighten and retry on a miss.
        let delta_norm = norm2(&delta);
        let mut at_delta = vec![0.0; mat.n_cols()];
        mat.mul_vec_t(&delta, &mut at_delta);
        let constraint_residual = if delta_norm == 0.0 {
            0.0
        } else {
            norm2(&at_delta) / delta_norm
        };
        let budget_residual = (dot(g, &delta) - z).abs() / z.abs();
        if constraint_residual <= tol && budget_residual <= tol {
            return Ok(WeightedLrSolution {
                delta,
                multiplier: v_hat,
                schur,
                iterations,
            });
        }
        last_miss = (constraint_residual, budget_residual);
        inner_tol = (inner_tol * 1e-2).max(1e-15);
    }
    Err(ResidualError::AccuracyNotMet {
        constraint_residual: last_miss.0,
        budget_residual: last_miss.1,
        tolerance: tol,
    })
}

fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(&x, &y)| x * y).sum()
}

fn norm2(v: &[f64]) -> f64 {
    v.iter().map(|&x| x * x).sum::<f64>().sqrt()
}
