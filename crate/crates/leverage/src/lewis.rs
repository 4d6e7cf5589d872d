//! ℓ_p Lewis weights by fixed-point iteration.
//!
//! For `p > 2` the Lewis weights of A are the unique positive solution of
//!
//! ```text
//! wᵢ = τᵢ(W^{1/2−1/p} A),   W = diag(w)
//! ```
//!
//! where τ denotes leverage scores. The plain fixed-point iteration
//! started from the uniform vector `d/n` contracts for `p > 2`, so a few
//! dozen rounds reach machine precision. Weights that collapse to zero
//! (e.g. rows of zeros) are floored at a configurable value and flagged.

use sparse_core::SparseMatrix;

use crate::scores::leverage_scores_exact;

/// Converged Lewis weights plus convergence diagnostics.
#[derive(Debug, Clone)]
pub struct LewisWeights {
    /// One weight per row, each at least the configured floor.
    pub values: Vec<f64>,
    /// `max_i |wᵢ − τᵢ(W^{1/2−1/p}A)| / wᵢ` after the final round.
    pub fixed_point_residual: f64,
    /// Whether any weight had to be floored during the iteration.
    pub floored: bool,
}

/// Runs `iterations` rounds of the Lewis-weight fixed-point iteration.
///
/// # Panics
/// Panics if `p ≤ 2`, `p` is not finite, `iterations = 0`, or
/// `floor ≤ 0`.
#[must_use]
pub fn lewis_weights(
    a: &SparseMatrix,
    p: f64,
    iterations: usize,
    floor: f64,
) -> LewisWeights {
    assert!(p.is_finite() && p > 2.0, "defined for p > 2, got {p}");
    assert!(iterations >= 1, "need at least one round");
    assert!(floor > 0.0 && floor.is_finite(), "floor must be positive");
    let n = a.n_rows();
    let d = a.n_cols();
    assert!(n >= d && d >= 1, "need n ≥ d ≥ 1");

    let exponent = 0.5 - 1.0 / p;
    let mut floored = false;
    let mut w = vec![d as f64 / n as f64; n];
    let reweighted_scores = |w: &[f64]| -> Vec<f64> {
        let scale: Vec<f64> = w.iter().map(|&wi| wi.powf(exponent)).collect();
        leverage_scores_exact(&a.scale_rows(&scale)).values
    };
    for _ in 0..iterations {
        let tau = reweighted_scores(&w);
        for (wi, ti) in w.iter_mut().zip(&tau) {
            let next = if ti.is_finite() { *ti } else { 1.0 };
            if next < floor {
                *wi = floor;
                floored = true;
            } else {
                *wi = next;
            }
        }
    }
    let tau = reweighted_scores(&w);
    let fixed_point_residual = w
        .iter()
        .zip(&tau)
        .map(|(&wi, &ti)| (wi - ti).abs() / wi)
        .fold(0.0f64, f64::max);
    LewisWeights {
        values: w,
        fixed_point_residual,
        floored,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use sparse_core::SeededRng;

    fn random_tall(n: usize, d: usize, seed: u64) -> SparseMatrix {
        let mut rng = SeededRng::new(seed, 3);
        let mut trip = Vec::new();
        for i in 0..n {
            for j in 0..d {
                if i % d == j || rng.uniform() < 0.5 {
                    trip.push((i, j, rng.standard_normal()));
                }
            }
        }
        SparseMatrix::from_triplets(n, d, &trip).unwrap()
    }

    #[test]
    fn exponent_near_two_reduces_to_plain_leverage_scores() {
        let a = random_tall(60, 6, 61);
        let lw = lewis_weights(&a, 2.0 + 1e-9, 30, 1e-300);
        let tau = leverage_scores_exact(&a);
        for (i, (w, t)) in lw.values.iter().zip(&tau.values).enumerate() {
            assert!(
                (w - t).abs() <= 1e-6,
                "row {i}: weight {w} vs leverage {t}"
            );
        }
        assert!(!lw.floored);
    }

    #[test]
    fn weights_sum_to_the_column_dimension() {
        let a = random_tall(80, 8, 62);
        let lw = lewis_weights(&a, 4.0, 60, 1e-300);
        let sum: f64 = lw.values.iter().sum();
        assert!(
            (sum - 8.0).abs() <= 1e-6,
            "weights sum {sum} differs from d = 8"
        );
    }

    #[test]
    fn fixed_point_residual_reaches_tolerance() {
        let a = random_tall(300, 10, 63);
        let lw = lewis_weights(&a, 4.0, 100, 1e-300);
        assert!(
            lw.fixed_point_residual <= 1e-8,
            "residual {} after 100 rounds",
            lw.fixed_point_residual
        );
    }

    #[test]
    fn zero_rows_floor_and_raise_the_flag() {
        let mut trip = Vec::new();
        let mut rng = SeededRng::new(64, 0);
        for i in 0..9 {
            for j in 0..3 {
                trip.push((i, j, rng.standard_normal() + if i % 3 == j { 2.0 } else { 0.0 }));
            }
        }
        // Row 9 carries no entries at all.
        let a = SparseMatrix::from_triplets(10, 3, &trip).unwrap();
        let lw = lewis_weights(&a, 3.0, 40, 1e-12);
        assert!(lw.floored, "a zero row must trip the floor");
        assert_eq!(lw.values[9], 1e-12, "zero row sits exactly at the floor");
        assert!(lw.values[..9].iter().all(|&w| w > 1e-12));
    }
}
