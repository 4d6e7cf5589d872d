use crate::{SeededRng, SparseCoreError, SparseMatrix};

/// Result of [`condition_number_estimate`].
#[derive(Debug, Clone)]
pub struct ConditionEstimate {
    /// Estimated condition number `λ_max(AᵀA) / λ_min(AᵀA)`.
    pub kappa: f64,
    /// Largest eigenvalue estimate of `AᵀA`.
    pub lambda_max: f64,
    /// Smallest eigenvalue estimate of `AᵀA`.
    pub lambda_min: f64,
    /// Outer power-iteration count for `λ_max`.
    pub power_iterations: usize,
    /// Outer inverse-iteration count for `λ_min`.
    pub inverse_iterations: usize,
    /// Total inner conjugate-gradient iterations spent in the inverse phase.
    pub cg_iterations: usize,
}

const REL_TOL: f64 = 1e-12;
const MAX_OUTER: usize = 1000;

/// Estimates the condition number of the normal-equation matrix `AᵀA` by
/// power iteration (largest eigenvalue) and inverse iteration with inner
/// conjugate-gradient solves (smallest eigenvalue).
///
/// The starting vectors are drawn from a fixed internal stream, so the
/// estimate is deterministic for a given matrix.
///
/// # Errors
/// [`SparseCoreError::RankDeficient`] when `AᵀA` is numerically singular
/// (the inner solver cannot reduce its residual); the payload carries the
/// number of iterations performed before the breakdown was detected.
pub fn condition_number_estimate(
    a: &SparseMatrix,
) -> Result<ConditionEstimate, SparseCoreError> {
    let d = a.n_cols();
    assert!(d > 0, "matrix must have at least one column");
    let mut rng = SeededRng::new(0x5EED_C0DE, 0);

    // --- Power iteration for λ_max -------------------------------------
    let mut v = normalized(rng.standard_normal_vec(d));
    let mut lambda_max = 0.0f64;
    let mut power_iterations = 0;
    let mut gv = vec![0.0; d];
    for it in 1..=MAX_OUTER {
        power_iterations = it;
        gram_mul(a, &v, &mut gv);
        let lambda = dot(&v, &gv);
        let norm = norm2(&gv);
        if norm == 0.0 {
            // Av = 0 for a generic v: the matrix is (numerically) zero.
            return Err(SparseCoreError::RankDeficient { iterations: it });
        }
        for (vi, gi) in v.iter_mut().zip(&gv) {
            *vi = gi / norm;
        }
        if (lambda - lambda_max).abs() <= REL_TOL * lambda.abs() && it > 1 {
            lambda_max = lambda;
            break;
        }
        lambda_max = lambda;
    }
    if !(lambda_max > 0.0) {
        return Err(SparseCoreError::RankDeficient {
            iterations: power_iterations,
        });
    }

    // --- Inverse iteration for λ_min ------------------------------------
    // Each step solves (AᵀA) z = y by conjugate gradient; failure of CG to
    // reduce the residual signals rank deficiency.
    let mut y = normalized(rng.standard_normal_vec(d));
    let mut lambda_min = lambda_max;
    let mut inverse_iterations = 0;
    let mut cg_iterations = 0;
    let cg_tol = 1e-10;
    let cg_max = 20 * d + 50;
    for it in 1..=MAX_OUTER {
        inverse_iterations = it;
        let (z, iters, converged) = cg_solve(a, &y, cg_tol, cg_max, lambda_max);
        cg_iterations += iters;
        if !converged {
            return Err(SparseCoreError::RankDeficient {
                iterations: power_iterations + it,
            });
        }
        let zn = normalized(z);
        gram_mul(a, &zn, &mut gv);
        let lambda = dot(&zn, &gv);
        y = zn;
        if (lambda - lambda_min).abs() <= REL_TOL * lambda.abs() && it > 1 {
            lambda_min = lambda;
            break;
        }
        lambda_min = lambda;
    }
    if !(lambda_min > 0.0) {
        return Err(SparseCoreError::RankDeficient {
            iterations: power_iterations + inverse_iterations,
        });
    }

    Ok(ConditionEstimate {
        kappa: lambda_max / lambda_min,
        lambda_max,
        lambda_min,
        power_iterations,
        inverse_iterations,
        cg_iterations,
    })
}

/// `out = AᵀA v` without forming the Gram matrix.
fn gram_mul(a: &SparseMatrix, v: &[f64], out: &mut [f64]) {
    let mut av = vec![0.0; a.n_rows()];
    a.mul_vec(v, &mut av);
    a.mul_vec_t(&av, out);
}

fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

fn norm2(v: &[f64]) -> f64 {
    dot(v, v).sqrt()
}

fn normalized(mut v: Vec<f64>) -> Vec<f64> {
    let n = norm2(&v);
    if n > 0.0 {
        for x in &mut v {
            *x /= n;
        }
    }
    v
}

/// Plain conjugate gradient on `(AᵀA) z = y`. Returns `(z, iterations,
/// converged)`; `converged` is false when the residual cannot be driven
/// below `tol · ‖y‖` (stagnation or iteration cap), which for a generic
/// right-hand side certifies singularity.
fn cg_solve(
    a: &SparseMatrix,
    y: &[f64],
    tol: f64,
    max_iter: usize,
    lambda_max: f64,
) -> (Vec<f64>, usize, bool) {
    let d = y.len();
    let mut z = vec![0.0; d];
    let mut r = y.to_vec();
    let mut p = y.to_vec();
    let mut gp = vec![0.0; d];
    let target = tol * norm2(y);
    let mut rr = dot(&r, &r);
    // Directions with curvature at the round-off floor relative to λ_max
    // indicate a numerically singular system.
    let curvature_floor = lambda_max * 1e-14;
    for it in 1..=max_iter {
        gram_mul(a, &p, &mut gp);
        let pgp = dot(&p, &gp);
        if pgp <= curvature_floor * dot(&p, &p) {
            return (z, it, false);
        }
        let alpha = rr / pgp;
        for i in 0..d {
            z[i] += alpha * p[i];
            r[i] -= alpha * gp[i];
        }
        let rr_new = dot(&r, &r);
        if rr_new.sqrt() <= target {
            return (z, it, true);
        }
        let beta = rr_new / rr;
        rr = rr_new;
        for i in 0..d {
            p[i] = r[i] + beta * p[i];
        }
    }
    (z, max_iter, false)
}
