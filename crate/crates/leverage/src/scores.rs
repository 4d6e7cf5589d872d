//! Exact and generalized leverage scores.
//!
//! The leverage score of row i of A is `τᵢ = aᵢᵀ(AᵀA)⁺aᵢ`: the fraction of
//! the row's direction that the rest of the matrix cannot explain. Scores
//! lie in [0, 1] and sum to the rank of A. The generalized score of a row
//! against another matrix B is `aᵢᵀ(BᵀB)⁺aᵢ` when `aᵢ` lies in B's row
//! space and +∞ otherwise (such a row can never be spectrally dominated by
//! samples of B).

use nalgebra::{DMatrix, DVector};
use sparse_core::SparseMatrix;

/// Per-row leverage (or over-)estimates.
#[derive(Debug, Clone)]
pub struct LeverageEstimate {
    /// One nonnegative score per row; may hold `+∞` for generalized scores.
    pub values: Vec<f64>,
    /// Whether the values are guaranteed overestimates (sketched scores)
    /// rather than exact.
    pub is_overestimate: bool,
    /// Cached Σ values.
    pub sum: f64,
    /// Whether a pseudo-inverse had to stand in for a Cholesky solve.
    pub used_pseudoinverse: bool,
}

impl LeverageEstimate {
    /// Wraps raw per-row values, computing the cached sum.
    #[must_use]
    pub fn from_values(values: Vec<f64>, is_overestimate: bool) -> Self {
        let sum = values.iter().sum();
        Self {
            values,
            is_overestimate,
            sum,
            used_pseudoinverse: false,
        }
    }
}

/// Inverse (or pseudo-inverse) of a small symmetric PSD gram matrix, with a
/// flag recording which path was taken.
fn gram_inverse(gram: &DMatrix<f64>) -> (DMatrix<f64>, bool) {
    if let Some(chol) = gram.clone().cholesky() {
        (chol.inverse(), false)
    } else {
        let eig = gram.clone().symmetric_eigen();
        let max_ev = eig.eigenvalues.amax();
        let cutoff = 1e-12 * max_ev.max(f64::MIN_POSITIVE);
        let inv_vals: Vec<f64> = eig
            .eigenvalues
            .iter()
            .map(|&l| if l > cutoff { 1.0 / l } else { 0.0 })
            .collect();
        let pinv = &eig.eigenvectors
            * DMatrix::from_diagonal(&DVector::from_vec(inv_vals))
            * eig.eigenvectors.transpose();
        (pinv, true)
    }
}

/// Exact leverage scores `τᵢ = aᵢᵀ(AᵀA)⁺aᵢ` via a dense gram factorization.
///
/// Rank-deficient matrices fall back to an eigenvalue pseudo-inverse and
/// set [`LeverageEstimate::used_pseudoinverse`].
///
/// # Panics
/// Panics on a matrix with zero columns.
#[must_use]
pub fn leverage_scores_exact(a: &SparseMatrix) -> LeverageEstimate {
    let d = a.n_cols();
    assert!(d > 0, "matrix must have at least one column");
    let gram = a.gram_dense();
    let gram_na = DMatrix::from_row_slice(d, d, gram.data());
    let (inv, used_pinv) = gram_inverse(&gram_na);

    let mut values = Vec::with_capacity(a.n_rows());
    for i in 0..a.n_rows() {
        let (cols, vals) = a.row(i);
        // τᵢ = Σ_{j,k} a_{ij}·inv[j,k]·a_{ik}, over the row's support.
        let mut tau = 0.0;
        for (&cj, &vj) in cols.iter().zip(vals) {
            let mut acc = 0.0;
            for (&ck, &vk) in cols.iter().zip(vals) {
                acc += inv[(cj, ck)] * vk;
            }
            tau += vj * acc;
        }
        values.push(tau.max(0.0));
    }
    let sum = values.iter().sum();
    LeverageEstimate {
        values,
        is_overestimate: false,
        sum,
        used_pseudoinverse: used_pinv,
    }
}

/// Generalized leverage scores of A's rows against B:
/// `τᵢᴮ = aᵢᵀ(BᵀB)⁺aᵢ` when `aᵢ` lies in the row space of B, `+∞` otherwise.
///
/// # Panics
/// Panics when column counts disagree.
#[must_use]
pub fn generalized_leverage_scores(
    a: &SparseMatrix,
    b: &SparseMatrix,
) -> LeverageEstimate {
    assert_eq!(a.n_cols(), b.n_cols(), "column counts must agree");
    let d = a.n_cols();
    let gram = b.gram_dense();
    let gram_na = DMatrix::from_row_slice(d, d, gram.data());
    let eig = gram_na.clone().symmetric_eigen();
    let max_ev = eig.eigenvalues.amax();
    let cutoff = 1e-12 * max_ev.max(f64::MIN_POSITIVE);

    // Pseudo-inverse and row-space projector share the eigenbasis.
    let inv_vals: Vec<f64> = eig
        .eigenvalues
        .iter()
        .map(|&l| if l > cutoff { 1.0 / l } else { 0.0 })
        .collect();
    let pinv = &eig.eigenvectors
        * DMatrix::from_diagonal(&DVector::from_vec(inv_vals))
        * eig.eigenvectors.transpose();
    let proj_vals: Vec<f64> = eig
        .eigenvalues
        .iter()
        .map(|&l| if l > cutoff { 1.0 } else { 0.0 })
        .collect();
    let projector = &eig.eigenvectors
        * DMatrix::from_diagonal(&DVector::from_vec(proj_vals))
        * eig.eigenvectors.transpose();

    let mut values = Vec::with_capacity(a.n_rows());
    let mut used_pinv = false;
    for i in 0..a.n_rows() {
        let (cols, vals) = a.row(i);
        let mut ai = DVector::<f64>::zeros(d);
        for (&c, &v) in cols.iter().zip(vals) {
            ai[c] = v;
        }
        let norm_sq: f64 = ai.norm_squared();
        if norm_sq == 0.0 {
            values.push(0.0);
            continue;
        }
        // Outside the row space of B the score is infinite by definition.
        let residual = (&ai - &projector * &ai).norm_squared();
        if residual > 1e-10 * norm_sq {
            values.push(f64::INFINITY);
            used_pinv = true;
            continue;
        }
        let tau = (ai.transpose() * &pinv * &ai)[(0, 0)];
        values.push(tau.max(0.0));
    }
    let sum = values.iter().sum();
    LeverageEstimate {
        values,
        is_overestimate: false,
        sum,
        used_pseudoinverse: used_pinv,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use sparse_core::SeededRng;

    fn random_sparse(n: usize, d: usize, seed: u64) -> SparseMatrix {
        let mut rng = SeededRng::new(seed, 0);
        let mut trip = Vec::new();
        for i in 0..n {
            for j in 0..d {
                if i % d == j || rng.uniform() < 0.4 {
                    trip.push((i, j, rng.standard_normal()));
                }
            }
        }
        SparseMatrix::from_triplets(n, d, &trip).unwrap()
    }

    #[test]
    fn identity_rows_have_unit_scores() {
        let scores = leverage_scores_exact(&SparseMatrix::identity(7));
        for &tau in &scores.values {
            assert!((tau - 1.0).abs() < 1e-12, "identity row score {tau}");
        }
        assert!(!scores.used_pseudoinverse);
    }

    #[test]
    fn scores_sum_to_at_most_the_column_count() {
        for seed in 0..5 {
            let a = random_sparse(40, 6, 100 + seed);
            let scores = leverage_scores_exact(&a);
            assert!(
                scores.sum <= 6.0 + 1e-9,
                "score sum {} exceeds column count",
                scores.sum
            );
            assert!(scores.values.iter().all(|&t| t >= 0.0));
        }
    }

    #[test]
    fn matches_svd_reference() {
        let a = random_sparse(30, 5, 7);
        let scores = leverage_scores_exact(&a);
        let reference = oracle::dense::leverage_scores_svd(&a, 1e-12);
        for (i, (got, want)) in
            scores.values.iter().zip(&reference).enumerate()
        {
            assert!(
                (got - want).abs() < 1e-10,
                "row {i}: {got} vs reference {want}"
            );
        }
    }

    #[test]
    fn duplicated_row_splits_its_score() {
        // Three copies of e₁ and one e₂: each copy of e₁ carries 1/3.
        let a = SparseMatrix::from_triplets(
            4,
            2,
            &[(0, 0, 1.0), (1, 0, 1.0), (2, 0, 1.0), (3, 1, 1.0)],
        )
        .unwrap();
        let scores = leverage_scores_exact(&a);
        for i in 0..3 {
            assert!(
                (scores.values[i] - 1.0 / 3.0).abs() < 1e-12,
                "copy {i} got {}",
                scores.values[i]
            );
        }
        assert!((scores.values[3] - 1.0).abs() < 1e-12);
    }

    #[test]
    fn generalized_against_self_equals_exact() {
        let a = random_sparse(25, 4, 11);
        let gen = generalized_leverage_scores(&a, &a);
        let exact = leverage_scores_exact(&a);
        for (g, e) in gen.values.iter().zip(&exact.values) {
            assert!((g - e).abs() < 1e-10, "{g} vs {e}");
        }
    }

    #[test]
    fn row_outside_the_span_gets_infinite_score() {
        // B spans only the first coordinate; A's second row points along e₂.
        let b = SparseMatrix::from_triplets(2, 2, &[(0, 0, 1.0), (1, 0, 2.0)])
            .unwrap();
        let a = SparseMatrix::from_triplets(2, 2, &[(0, 0, 3.0), (1, 1, 1.0)])
            .unwrap();
        let gen = generalized_leverage_scores(&a, &b);
        assert!(gen.values[0].is_finite());
        assert!(gen.values[1].is_infinite(), "kernel direction must be ∞");
    }

    #[test]
    fn generalized_matches_dense_pseudoinverse_formula() {
        let a = random_sparse(20, 4, 13);
        let b = random_sparse(30, 4, 17);
        let gen = generalized_leverage_scores(&a, &b);
        let bd = oracle::dense::to_dmatrix(&b);
        let pinv = oracle::dense::pseudo_inverse(
            &(bd.transpose() * &bd),
            1e-12,
        );
        for i in 0..20 {
            let (cols, vals) = a.row(i);
            let mut ai = DVector::<f64>::zeros(4);
            for (&c, &v) in cols.iter().zip(vals) {
                ai[c] = v;
            }
            let want = (ai.transpose() * &pinv * &ai)[(0, 0)];
            assert!(
                (gen.values[i] - want).abs() < 1e-10 * want.max(1.0),
                "row {i}: {} vs {want}",
                gen.values[i]
            );
        }
    }

    #[test]
    fn product_of_row_and_score_is_uniform_over_predictions() {
        // For y = Ax, every coordinate obeys yᵢ² ≤ τᵢ·‖y‖₂².
        let a = random_sparse(60, 6, 19);
        let scores = leverage_scores_exact(&a);
        let mut rng = SeededRng::new(20, 1);
        for _ in 0..500 {
            let x = rng.standard_normal_vec(6);
            let y = a.matvec(&x).unwrap();
            let norm_sq: f64 = y.iter().map(|v| v * v).sum();
            for (i, yi) in y.iter().enumerate() {
                assert!(
                    yi * yi <= scores.values[i] * norm_sq + 1e-9,
                    "coordinate {i}: {} > τ·‖y‖² = {}",
                    yi * yi,
                    scores.values[i] * norm_sq
                );
            }
        }
    }
}
