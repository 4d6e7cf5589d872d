//! High-accuracy reference for the linearly constrained smoothed-norm
//! program
//!
//! ```text
//! minimize   Σᵢ γₚ(tᵢ, Δᵢ)
//! subject to AᵀΔ = 0     (optional)
//!            gᵀΔ = z
//! ```
//!
//! where `γₚ(t, x)` is the quadratically smoothed power penalty
//!
//! ```text
//! γₚ(t, x) = (p/2)·t^{p−2}·x²          for |x| ≤ t
//!            |x|ᵖ + (p/2 − 1)·tᵖ       otherwise
//! ```
//!
//! (with `γₚ(0, x) = |x|ᵖ`). The module keeps its own self-contained
//! definition of the penalty so the reference shares no code with the
//! library implementation it is used to check.

use nalgebra::{DMatrix, DVector};
use sparse_core::SparseMatrix;

use crate::{dense, OracleError};

/// Output of [`gamma_constrained_min`].
#[derive(Debug, Clone)]
pub struct GammaMinSolution {
    /// The minimizer Δ.
    pub delta: Vec<f64>,
    /// Σᵢ γₚ(tᵢ, Δᵢ) at the minimizer.
    pub objective: f64,
    /// Newton iterations used.
    pub iterations: usize,
    /// Projected-gradient target the solve was driven to.
    pub tolerance: f64,
    /// Method tag.
    pub method: &'static str,
}

/// Self-contained smoothed penalty (value).
fn gv(p: f64, t: f64, x: f64) -> f64 {
    let ax = x.abs();
    if t == 0.0 {
        ax.powf(p)
    } else if ax <= t {
        0.5 * p * t.powf(p - 2.0) * x * x
    } else {
        ax.powf(p) + (0.5 * p - 1.0) * t.powf(p)
    }
}

/// Self-contained smoothed penalty (first derivative in x).
fn gd1(p: f64, t: f64, x: f64) -> f64 {
    let ax = x.abs();
    if t != 0.0 && ax <= t {
        p * t.powf(p - 2.0) * x
    } else if x == 0.0 {
        0.0
    } else {
        p * x.signum() * ax.powf(p - 1.0)
    }
}

/// Self-contained smoothed penalty (second derivative in x, may be +∞ at an
/// exact kink for p < 2; callers clamp).
fn gd2(p: f64, t: f64, x: f64) -> f64 {
    let ax = x.abs();
    if t != 0.0 && ax <= t {
        p * t.powf(p - 2.0)
    } else {
        p * (p - 1.0) * ax.powf(p - 2.0)
    }
}

/// Solves the constrained smoothed-norm program to high accuracy by damped
/// Newton steps restricted to the constraint null space.
///
/// `a` (if given) has shape n × d and contributes the d constraints
/// `AᵀΔ = 0`; `g` and `t` have length n. The returned point satisfies the
/// constraints to round-off and has a projected gradient below
/// `tol · max(1, ‖pg₀‖)`.
///
/// # Errors
/// * [`OracleError::Degenerate`] if the constraints cannot be satisfied
///   (e.g. `z ≠ 0` while `g` lies in the column span of `A`);
/// * [`OracleError::NonConvergence`] if the iteration cap is hit first.
///
/// # Panics
/// Panics if `p <= 1`, lengths disagree, `t` has a negative entry, or
/// `tol <= 0`.
pub fn gamma_constrained_min(
    p: f64,
    t: &[f64],
    a: Option<&SparseMatrix>,
    g: &[f64],
    z: f64,
    tol: f64,
) -> Result<GammaMinSolution, OracleError> {
    assert!(p > 1.0, "exponent must exceed 1, got {p}");
    assert!(tol > 0.0, "tolerance must be positive");
    assert_eq!(g.len(), t.len(), "gradient/threshold length mismatch");
    assert!(t.iter().all(|&ti| ti >= 0.0), "thresholds must be nonnegative");
    let n = g.len();

    // Stack the homogeneous constraints and the level constraint into one
    // dense matrix B = [A | g] of shape n × (d+1): feasible set is
    // BᵀΔ = (0, …, 0, z).
    let d_cols = a.map_or(0, SparseMatrix::n_cols);
    if let Some(a) = a {
        assert_eq!(a.n_rows(), n, "constraint matrix row count mismatch");
    }
    let mut b_mat = DMatrix::<f64>::zeros(n, d_cols + 1);
    if let Some(a) = a {
        let ad = dense::to_dmatrix(a);
        b_mat.view_mut((0, 0), (n, d_cols)).copy_from(&ad);
    }
    for i in 0..n {
        b_mat[(i, d_cols)] = g[i];
    }
    let mut rhs_c = DVector::<f64>::zeros(d_cols + 1);
    rhs_c[d_cols] = z;

    // Minimum-norm feasible start: Δ₀ = B (BᵀB)⁺ rhs.
    let btb = b_mat.transpose() * &b_mat;
    let btb_pinv = dense::pseudo_inverse(&btb, 1e-13);
    let delta0 = &b_mat * (&btb_pinv * &rhs_c);
    let feas = (b_mat.transpose() * &delta0 - &rhs_c).amax();
    if feas > 1e-8 * (1.0 + z.abs()) {
        return Err(OracleError::Degenerate(format!(
            "level constraint unreachable inside the null space \
             (feasibility defect {feas:.3e})"
        )));
    }
    let mut x: Vec<f64> = delta0.iter().copied().collect();

    let objective = |x: &[f64]| -> f64 {
        x.iter().zip(t).map(|(&xi, &ti)| gv(p, ti, xi)).sum()
    };
    let gradient = |x: &[f64]| -> Vec<f64> {
        x.iter().zip(t).map(|(&xi, &ti)| gd1(p, ti, xi)).collect()
    };
    let proj_norm = |grad: &[f64]| -> f64 {
        let gvec = DVector::from_column_slice(grad);
        let lam = &btb_pinv * (b_mat.transpose() * &gvec);
        (gvec - &b_mat * lam).norm()
    };

    let pg0 = proj_norm(&gradient(&x));
    let target = tol * pg0.max(1.0);
    let max_iter = 200;
    let mut lm = 0.0f64;
    let mut pg = pg0;
    let mut iterations = 0;

    while pg > target {
        if iterations >= max_iter {
            return Err(OracleError::NonConvergence {
                iterations,
                residual: pg,
            });
        }
        iterations += 1;
        let grad = gradient(&x);
        // Curvature diagonal with clamps: infinite curvature pins a
        // coordinate (huge finite value), vanishing curvature is floored so
        // the Schur complement stays invertible.
        let mut d_diag: Vec<f64> =
            x.iter().zip(t).map(|(&xi, &ti)| gd2(p, ti, xi)).collect();
        let d_max = d_diag
            .iter()
            .copied()
            .filter(|v| v.is_finite())
            .fold(0.0f64, f64::max)
            .max(1e-300);
        for v in &mut d_diag {
            if !v.is_finite() || *v > 1e16 * d_max {
                *v = 1e16 * d_max;
            }
            if *v < 1e-14 * d_max {
                *v = 1e-14 * d_max;
            }
        }

        let f0 = objective(&x);
        let mut accepted = false;
        for _ramp in 0..30 {
            // Null-space Newton step via the Schur complement on the
            // multipliers: [D+λI, B; Bᵀ, 0] [dx; μ] = [−grad; 0].
            let h_inv: Vec<f64> = d_diag.iter().map(|&dv| 1.0 / (dv + lm)).collect();
            let k = d_cols + 1;
            let mut schur = DMatrix::<f64>::zeros(k, k);
            for i in 0..k {
                for j in 0..k {
                    let mut acc = 0.0;
                    for r in 0..n {
                        acc += b_mat[(r, i)] * h_inv[r] * b_mat[(r, j)];
                    }
                    schur[(i, j)] = acc;
                }
            }
            let mut rhs = DVector::<f64>::zeros(k);
            for i in 0..k {
                let mut acc = 0.0;
                for r in 0..n {
                    acc += b_mat[(r, i)] * h_inv[r] * (-grad[r]);
                }
                rhs[i] = acc;
            }
            let pinv = dense::pseudo_inverse(&schur, 1e-13);
            let mu = pinv * rhs;
            let mut dx = vec![0.0; n];
            for r in 0..n {
                let mut bm = 0.0;
                for i in 0..k {
                    bm += b_mat[(r, i)] * mu[i];
                }
                dx[r] = h_inv[r] * (-grad[r] - bm);
            }
            let slope: f64 = grad.iter().zip(&dx).map(|(gi, si)| gi * si).sum();
            if !slope.is_finite() || slope >= 0.0 {
                lm = if lm == 0.0 { 1e-10 * d_max } else { lm * 10.0 };
                continue;
            }
            let mut step = 1.0f64;
            while step > 1e-16 {
                let x_trial: Vec<f64> =
                    x.iter().zip(&dx).map(|(xi, si)| xi + step * si).collect();
                let f_trial = objective(&x_trial);
                if f_trial <= f0 + 1e-4 * step * slope {
                    x = x_trial;
                    accepted = true;
                    break;
                }
                step *= 0.5;
            }
            if accepted {
                lm *= 0.25;
                break;
            }
            lm = if lm == 0.0 { 1e-10 * d_max } else { lm * 10.0 };
        }
        pg = proj_norm(&gradient(&x));
        if !accepted {
            break; // stalled; judged against the target below
        }
    }

    if !(pg <= target) {
        return Err(OracleError::NonConvergence {
            iterations,
            residual: pg,
        });
    }
    Ok(GammaMinSolution {
        objective: objective(&x),
        delta: x,
        iterations,
        tolerance: tol,
        method: "null-space-newton",
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fd::finite_difference;

    #[test]
    fn quadratic_case_matches_minimum_norm_formula() {
        // p = 2 makes the objective Σ Δᵢ² regardless of t, so the optimum is
        // the minimum-norm point of the affine constraint set.
        let n = 6;
        let t = vec![0.3; n];
        let g: Vec<f64> = (0..n).map(|i| 1.0 + i as f64).collect();
        let a = SparseMatrix::from_triplets(
            n,
            2,
            &[
                (0, 0, 1.0),
                (1, 0, -1.0),
                (2, 1, 2.0),
                (3, 1, 1.0),
                (4, 0, 0.5),
            ],
        )
        .unwrap();
        let z = 2.5;
        let sol = gamma_constrained_min(2.0, &t, Some(&a), &g, z, 1e-12).unwrap();

        let mut b = DMatrix::<f64>::zeros(n, 3);
        b.view_mut((0, 0), (n, 2)).copy_from(&dense::to_dmatrix(&a));
        for i in 0..n {
            b[(i, 2)] = g[i];
        }
        let rhs = DVector::from_column_slice(&[0.0, 0.0, z]);
        let pinv = dense::pseudo_inverse(&(b.transpose() * &b), 1e-13);
        let want = &b * (pinv * rhs);
        for (got, want) in sol.delta.iter().zip(want.iter()) {
            assert!((got - want).abs() < 1e-9, "{got} vs {want}");
        }
    }

    #[test]
    fn symmetric_instance_splits_evenly() {
        // All thresholds 1, gradient all ones, level 3 over 3 coordinates:
        // convexity and symmetry force Δ = (1, 1, 1); each coordinate sits on
        // the quadratic piece boundary with value (p/2)·1·1.
        let sol =
            gamma_constrained_min(4.0, &[1.0; 3], None, &[1.0; 3], 3.0, 1e-11)
                .unwrap();
        for di in &sol.delta {
            assert!((di - 1.0).abs() < 1e-8, "expected 1.0, got {di}");
        }
        assert!((sol.objective - 6.0).abs() < 1e-7, "objective {}", sol.objective);
    }

    #[test]
    fn level_in_constraint_span_is_degenerate() {
        // g equals the constraint column: gᵀΔ vanishes on the whole feasible
        // set, so a nonzero level is unreachable.
        let a = SparseMatrix::from_triplets(3, 1, &[(0, 0, 1.0), (1, 0, 2.0)])
            .unwrap();
        let g = vec![1.0, 2.0, 0.0];
        let r = gamma_constrained_min(3.0, &[1.0; 3], Some(&a), &g, 1.0, 1e-10);
        assert!(matches!(r, Err(OracleError::Degenerate(_))));
    }

    #[test]
    fn penalty_derivative_matches_finite_differences() {
        for &(p, t) in &[(1.5, 0.7), (2.0, 0.0), (3.5, 1.2)] {
            for &x0 in &[-2.0, -0.3, 0.4, 1.9] {
                let fd = finite_difference(
                    |x: &[f64]| gv(p, t, x[0]),
                    &[x0],
                    1e-5,
                );
                let want = gd1(p, t, x0);
                assert!(
                    (fd.gradient[0] - want).abs()
                        <= 1e-7 * want.abs().max(1.0) + fd.error_estimate * 10.0,
                    "p={p} t={t} x={x0}: fd {} vs analytic {want}",
                    fd.gradient[0]
                );
            }
        }
    }

    #[test]
    fn objective_grows_with_the_level() {
        let t = vec![0.5, 1.0, 2.0, 0.0];
        let g = vec![1.0, -1.0, 0.5, 2.0];
        let mut prev = 0.0;
        for &z in &[0.5, 1.0, 2.0, 4.0] {
            let sol = gamma_constrained_min(2.5, &t, None, &g, z, 1e-10).unwrap();
            assert!(
                sol.objective > prev,
                "objective should grow with z: {} after {prev}",
                sol.objective
            );
            prev = sol.objective;
        }
    }
}
