//! Preconditioned Richardson iteration on the normal equations: given an
//! operator that applies `M⁻¹` with `AᵀA ⪯ M ⪯ λ·AᵀA`, the iteration
//!
//! ```text
//! x ← x − M⁻¹(AᵀA·x − Aᵀb)
//! ```
//!
//! contracts the error by `(1 − 1/λ)` per step in the M-norm, so the
//! iteration budget scales like `λ·log(initial error / tolerance)`.
//!
//! Row-weighted systems are handled by pre-scaling: to solve
//! `AᵀWA·x = AᵀWb`, pass `diag(√W)·A` and `diag(√W)·b`.

use sparse_core::SparseMatrix;

use crate::inverse::ApplyInverse;
use crate::LinearSolverError;

/// Stopping rule for [`richardson_solve`]: iterate until the normal-equation
/// residual `‖Aᵀ(Ax − b)‖₂` drops below `relative_tolerance · ‖Aᵀb‖₂`.
#[derive(Debug, Clone, Copy)]
pub struct StoppingRule {
    /// Relative residual target (against the right-hand side `Aᵀb`).
    pub relative_tolerance: f64,
    /// Extra iterations allowed beyond the contraction-based budget.
    pub margin: usize,
}

impl StoppingRule {
    /// A rule with the given relative tolerance and the default margin.
    #[must_use]
    pub fn new(relative_tolerance: f64) -> Self {
        assert!(
            relative_tolerance > 0.0 && relative_tolerance < 1.0,
            "relative tolerance must lie in (0, 1)"
        );
        Self {
            relative_tolerance,
            margin: 30,
        }
    }
}

/// Outcome of a converged [`richardson_solve`].
#[derive(Debug, Clone)]
pub struct RichardsonSolve {
    /// The solution estimate.
    pub x: Vec<f64>,
    /// Iterations performed.
    pub iterations: usize,
    /// Relative normal-equation residual after each iteration.
    pub residual_history: Vec<f64>,
}

/// Runs preconditioned Richardson iteration for `min ‖Ax − b‖₂`.
///
/// `precond` must apply (approximately) `M⁻¹` for some `M` with
/// `AᵀA ⪯ M ⪯ λ·AᵀA`; the caller vouches for `λ`. The iteration budget is
/// `⌈λ·ln(1/tol)⌉ + margin`.
///
/// # Errors
/// [`LinearSolverError::Diverged`] with the residual history when the
/// budget is exhausted (or the residual becomes non-finite) before the
/// target is met.
///
/// # Panics
/// Panics if `λ < 1` or dimensions disagree.
pub fn richardson_solve(
    a: &SparseMatrix,
    b: &[f64],
    precond: &dyn ApplyInverse,
    lambda: f64,
    target: &StoppingRule,
) -> Result<RichardsonSolve, LinearSolverError> {
    assert!(lambda >= 1.0, "contraction parameter must be at least 1");
    assert_eq!(b.len(), a.n_rows(), "right-hand side length mismatch");
    assert_eq!(precond.dim(), a.n_cols(), "preconditioner dimension mismatch");
    let d = a.n_cols();

    let mut atb = vec![0.0; d];
    a.mul_vec_t(b, &mut atb);
    let rhs_norm = norm2(&atb);
    if rhs_norm == 0.0 {
        return Ok(RichardsonSolve {
            x: vec![0.0; d],
            iterations: 0,
            residual_history: Vec::new(),
        });
    }

    let budget = (lambda * (1.0 / target.relative_tolerance).ln()).ceil()
        as usize
        + target.margin;
    let mut x = vec![0.0; d];
    let mut ax = vec![0.0; a.n_rows()];
    let mut atax = vec![0.0; d];
    let mut history = Vec::with_capacity(budget);
    for iteration in 0..budget {
        // s = AᵀA·x − Aᵀb
        a.mul_vec(&x, &mut ax);
        a.mul_vec_t(&ax, &mut atax);
        let s: Vec<f64> = atax.iter().zip(&atb).map(|(h, r)| h - r).collect();
        let rel = norm2(&s) / rhs_norm;
        history.push(rel);
        if rel <= target.relative_tolerance {
            return Ok(RichardsonSolve {
                x,
                iterations: iteration,
                residual_history: history,
            });
        }
        if !rel.is_finite() || rel > 1e6 {
            return Err(LinearSolverError::Diverged {
                iterations: iteration,
                history,
            });
        }
        let step = precond.apply(&s);
        for (xi, si) in x.iter_mut().zip(&step) {
            *xi -= si;
        }
    }
    // Final check after the last update.
    a.mul_vec(&x, &mut ax);
    a.mul_vec_t(&ax, &mut atax);
    let s: Vec<f64> = atax.iter().zip(&atb).map(|(h, r)| h - r).collect();
    let rel = norm2(&s) / rhs_norm;
    history.push(rel);
    if rel <= target.relative_tolerance {
        Ok(RichardsonSolve {
            x,
            iterations: budget,
            residual_history: history,
        })
    } else {
        Err(LinearSolverError::Diverged {
            iterations: budget,
            history,
        })
    }
}

fn norm2(v: &[f64]) -> f64 {
    v.iter().map(|x| x * x).sum::<f64>().sqrt()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::inverse::build_inverse_operator;
    use nalgebra::{DMatrix, DVector};
    use sparse_core::SeededRng;

    fn random_sparse(n: usize, d: usize, seed: u64) -> SparseMatrix {
        let mut rng = SeededRng::new(seed, 0);
        let mut triplets = Vec::new();
        for i in 0..n {
            for j in 0..d {
                if i % d == j || rng.uniform() < 0.4 {
                    triplets.push((i, j, rng.standard_normal()));
                }
            }
        }
        SparseMatrix::from_triplets(n, d, &triplets).unwrap()
    }

    /// Test preconditioner: M = V·diag(mᵢλᵢ)·Vᵀ in the eigenbasis of AᵀA,
    /// with per-eigenvalue multipliers mᵢ ∈ [1, λ], so AᵀA ⪯ M ⪯ λ·AᵀA holds
    /// exactly. Applies M⁻¹ densely and exposes M for norm measurements.
    struct EigenSplit {
        m_inv: DMatrix<f64>,
        m: DMatrix<f64>,
    }

    impl EigenSplit {
        fn new(a: &SparseMatrix, lambda: f64, rng: &mut SeededRng) -> Self {
            let d = a.n_cols();
            let gram = a.gram_dense();
            let gm = DMatrix::from_row_slice(d, d, gram.data());
            let eig = gm.symmetric_eigen();
            let mut mults = Vec::with_capacity(d);
            for i in 0..d {
                // Force one multiplier to the extreme so the band is tight.
                let m = if i == 0 { lambda } else { 1.0 + rng.uniform() * (lambda - 1.0) };
                mults.push(m);
            }
            let v = &eig.eigenvectors;
            let scaled: Vec<f64> = eig
                .eigenvalues
                .iter()
                .zip(&mults)
                .map(|(l, m)| l * m)
                .collect();
            let m = v * DMatrix::from_diagonal(&DVector::from_vec(scaled.clone()))
                * v.transpose();
            let inv_scaled: Vec<f64> = scaled.iter().map(|s| 1.0 / s).collect();
            let m_inv = v
                * DMatrix::from_diagonal(&DVector::from_vec(inv_scaled))
                * v.transpose();
            Self { m_inv, m }
        }

        fn m_norm(&self, e: &[f64]) -> f64 {
            let ev = DVector::from_column_slice(e);
            (ev.transpose() * &self.m * &ev)[(0, 0)].max(0.0).sqrt()
        }
    }

    impl ApplyInverse for EigenSplit {
        fn dim(&self) -> usize {
            self.m_inv.nrows()
        }
        fn apply(&self, rhs: &[f64]) -> Vec<f64> {
            (&self.m_inv * DVector::from_column_slice(rhs))
                .as_slice()
                .to_vec()
        }
    }

    #[test]
    fn exact_preconditioner_converges_in_one_iteration() {
        let a = random_sparse(30, 6, 31);
        let mut rng = SeededRng::new(5, 1);
        let b = rng.standard_normal_vec(30);
        let op = build_inverse_operator(&a, &[1.0; 30], 1e-12).unwrap();
        let out =
            richardson_solve(&a, &b, &op, 1.0, &StoppingRule::new(1e-8)).unwrap();
        assert!(
            out.iterations <= 2,
            "exact preconditioner took {} iterations",
            out.iterations
        );
    }

    #[test]
    fn matches_dense_least_squares() {
        let a = random_sparse(100, 10, 37);
        let mut rng = SeededRng::new(6, 2);
        let b = rng.standard_normal_vec(100);
        let op = build_inverse_operator(&a, &[1.0; 100], 1e-12).unwrap();
        let out =
            richardson_solve(&a, &b, &op, 1.0, &StoppingRule::new(1e-12)).unwrap();
        let ad = DMatrix::from_fn(100, 10, |i, j| {
            let (cols, vals) = a.row(i);
            cols.iter().position(|&c| c == j).map_or(0.0, |k| vals[k])
        });
        let want = (ad.transpose() * &ad)
            .lu()
            .solve(&(ad.transpose() * DVector::from_column_slice(&b)))
            .unwrap();
        for (g, w) in out.x.iter().zip(want.iter()) {
            assert!((g - w).abs() < 1e-10 * w.abs().max(1.0), "{g} vs {w}");
        }
    }

    #[test]
    fn banded_preconditioner_contracts_at_the_guaranteed_rate() {
        let lambda = 2.0;
        let a = random_sparse(80, 8, 41);
        let mut rng = SeededRng::new(7, 3);
        let split = EigenSplit::new(&a, lambda, &mut rng);
        let b = rng.standard_normal_vec(80);

        // Reference solution for error measurement.
        let gram = a.gram_dense();
        let gm = DMatrix::from_row_slice(8, 8, gram.data());
        let mut atb = vec![0.0; 8];
        a.mul_vec_t(&b, &mut atb);
        let x_star = gm.lu().solve(&DVector::from_column_slice(&atb)).unwrap();

        // Manual iteration so each error is measured in the M-norm.
        let mut x = vec![0.0; 8];
        let mut prev = {
            let e: Vec<f64> =
                x.iter().zip(x_star.iter()).map(|(xi, s)| xi - s).collect();
            split.m_norm(&e)
        };
        let mut ax = vec![0.0; 80];
        let mut atax = vec![0.0; 8];
        for _ in 0..12 {
            a.mul_vec(&x, &mut ax);
            a.mul_vec_t(&ax, &mut atax);
            let s: Vec<f64> =
                atax.iter().zip(&atb).map(|(h, r)| h - r).collect();
            let step = split.apply(&s);
            for (xi, si) in x.iter_mut().zip(&step) {
                *xi -= si;
            }
            let e: Vec<f64> =
                x.iter().zip(x_star.iter()).map(|(xi, s)| xi - s).collect();
            let cur = split.m_norm(&e);
            if prev > 1e-13 {
                let rate = cur / prev;
                assert!(
                    rate <= 1.0 - 1.0 / lambda + 0.01,
                    "contraction rate {rate} exceeds {}",
                    1.0 - 1.0 / lambda + 0.01
                );
            }
            prev = cur;
        }
    }

    #[test]
    fn hopeless_preconditioner_reports_divergence_with_history() {
        // A "preconditioner" that overshoots by 3x diverges for the extreme
        // eigendirections; the error must carry the residual history.
        struct Overshoot(usize);
        impl ApplyInverse for Overshoot {
            fn dim(&self) -> usize {
                self.0
            }
            fn apply(&self, rhs: &[f64]) -> Vec<f64> {
                rhs.iter().map(|r| 3.0 * r).collect()
            }
        }
        let a = random_sparse(40, 5, 43);
        let mut rng = SeededRng::new(8, 4);
        let b = rng.standard_normal_vec(40);
        let err = richardson_solve(
            &a,
            &b,
            &Overshoot(5),
            1.5,
            &StoppingRule::new(1e-10),
        )
        .unwrap_err();
        match err {
            LinearSolverError::Diverged { history, .. } => {
                assert!(!history.is_empty(), "history must be recorded");
            }
            other => panic!("expected divergence, got {other}"),
        }
    }

    #[test]
    fn zero_rhs_returns_zero_immediately() {
        let a = random_sparse(20, 4, 47);
        let op = build_inverse_operator(&a, &[1.0; 20], 1e-10).unwrap();
        let out = richardson_solve(
            &a,
            &vec![0.0; 20],
            &op,
            1.0,
            &StoppingRule::new(1e-10),
        )
        .unwrap();
        assert_eq!(out.x, vec![0.0; 4]);
        assert_eq!(out.iterations, 0);
    }
}
