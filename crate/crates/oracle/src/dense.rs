//! Dense linear-algebra helpers shared by the oracles and by verification
//! code: conversions between the workspace containers and `nalgebra`, a
//! pseudo-inverse, SVD-based leverage scores, and generalized eigenvalue
//! ranges for comparing quadratic forms.

use nalgebra::{DMatrix, DVector};
use sparse_core::{DenseMatrix, SparseMatrix};

/// Converts a CSR matrix to a dense `nalgebra` matrix.
#[must_use]
pub fn to_dmatrix(a: &SparseMatrix) -> DMatrix<f64> {
    let mut m = DMatrix::zeros(a.n_rows(), a.n_cols());
    for i in 0..a.n_rows() {
        let (cols, vals) = a.row(i);
        for (&c, &v) in cols.iter().zip(vals) {
            m[(i, c)] = v;
        }
    }
    m
}

/// Converts a row-major [`DenseMatrix`] to a `nalgebra` matrix.
#[must_use]
pub fn dense_to_dmatrix(a: &DenseMatrix) -> DMatrix<f64> {
    DMatrix::from_row_slice(a.n_rows(), a.n_cols(), a.data())
}

/// Converts a `nalgebra` matrix to a row-major [`DenseMatrix`].
#[must_use]
pub fn dmatrix_to_dense(m: &DMatrix<f64>) -> DenseMatrix {
    let mut out = DenseMatrix::zeros(m.nrows(), m.ncols());
    for i in 0..m.nrows() {
        for j in 0..m.ncols() {
            out[(i, j)] = m[(i, j)];
        }
    }
    out
}

/// Moore–Penrose pseudo-inverse with a relative singular-value cutoff.
///
/// # Panics
/// Panics if the SVD fails to converge (practically unreachable for finite
/// inputs).
#[must_use]
pub fn pseudo_inverse(m: &DMatrix<f64>, rel_cutoff: f64) -> DMatrix<f64> {
    let svd = m.clone().svd(true, true);
    let max_sv = svd.singular_values.iter().cloned().fold(0.0f64, f64::max);
    let cutoff = max_sv * rel_cutoff;
    svd.pseudo_inverse(cutoff)
        .expect("SVD-based pseudo-inverse cannot fail after a successful SVD")
}

/// Solves the dense linear system `m x = rhs` by LU with partial pivoting.
/// Returns `None` when the factorization deems the matrix singular.
#[must_use]
pub fn solve_lu(m: &DMatrix<f64>, rhs: &[f64]) -> Option<Vec<f64>> {
    let lu = m.clone().lu();
    lu.solve(&DVector::from_column_slice(rhs))
        .map(|v| v.as_slice().to_vec())
}

/// Leverage scores via the thin SVD: with `A = U Σ Vᵀ` (rank-truncated at
/// `rel_cutoff·σ_max`), the i-th score is the squared 2-norm of the i-th row
/// of `U`. This is an independent route to `aᵢᵀ(AᵀA)⁺aᵢ`.
#[must_use]
pub fn leverage_scores_svd(a: &SparseMatrix, rel_cutoff: f64) -> Vec<f64> {
    let m = to_dmatrix(a);
    let svd = m.svd(true, false);
    let u = svd.u.expect("requested U factor");
    let max_sv = svd.singular_values.iter().cloned().fold(0.0f64, f64::max);
    let cutoff = max_sv * rel_cutoff;
    let rank_cols: Vec<usize> = svd
        .singular_values
        .iter()
        .enumerate()
        .filter(|(_, s)| **s > cutoff)
        .map(|(k, _)| k)
        .collect();
    (0..a.n_rows())
        .map(|i| rank_cols.iter().map(|&k| u[(i, k)] * u[(i, k)]).sum())
        .collect()
}

/// Range `(min, max)` of the generalized eigenvalues of the pencil
/// `(B, G)` restricted to the range of `G`: the extreme values of
/// `xᵀBx / xᵀGx`. Both matrices must be symmetric positive semidefinite
/// with `range(B) ⊆ range(G)`.
#[must_use]
pub fn generalized_eigen_range(b: &DMatrix<f64>, g: &DMatrix<f64>) -> (f64, f64) {
    // Whiten by G^{-1/2} computed from the symmetric eigendecomposition,
    // dropping the (numerical) null space of G.
    let eig = g.clone().symmetric_eigen();
    let max_ev = eig.eigenvalues.iter().cloned().fold(0.0f64, f64::max);
    let cutoff = max_ev * 1e-12;
    let kept: Vec<usize> = (0..eig.eigenvalues.len())
        .filter(|&k| eig.eigenvalues[k] > cutoff)
        .collect();
    let d = g.nrows();
    let r = kept.len();
    let mut w = DMatrix::zeros(d, r);
    for (jj, &k) in kept.iter().enumerate() {
        let scale = 1.0 / eig.eigenvalues[k].sqrt();
        for i in 0..d {
            w[(i, jj)] = eig.eigenvectors[(i, k)] * scale;
        }
    }
    let reduced = w.transpose() * b * &w;
    let sym = (&reduced + reduced.transpose()) * 0.5;
    let evals = sym.symmetric_eigen().eigenvalues;
    let min = evals.iter().cloned().fold(f64::INFINITY, f64::min);
    let max = evals.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
    (min, max)
}

/// Spectral norm (largest singular value).
#[must_use]
pub fn spectral_norm(m: &DMatrix<f64>) -> f64 {
    m.clone()
        .svd(false, false)
        .singular_values
        .iter()
        .cloned()
        .fold(0.0f64, f64::max)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn pseudo_inverse_of_identity_is_identity() {
        let i3 = DMatrix::<f64>::identity(3, 3);
        let p = pseudo_inverse(&i3, 1e-12);
        assert!((p - i3).norm() < 1e-12);
    }

    #[test]
    fn svd_leverage_scores_sum_to_rank() {
        let a = SparseMatrix::from_triplets(
            4,
            2,
            &[(0, 0, 1.0), (1, 1, 1.0), (2, 0, 1.0), (2, 1, 1.0), (3, 0, 2.0)],
        )
        .unwrap();
        let tau = leverage_scores_svd(&a, 1e-12);
        let sum: f64 = tau.iter().sum();
        assert!((sum - 2.0).abs() < 1e-10, "scores sum {sum}, expected rank 2");
        assert!(tau.iter().all(|&t| (0.0..=1.0 + 1e-12).contains(&t)));
    }

    #[test]
    fn generalized_eigen_range_of_scaled_pencil() {
        // B = 0.5 G  →  all generalized eigenvalues are exactly 0.5.
        let g = DMatrix::from_row_slice(2, 2, &[2.0, 0.3, 0.3, 1.0]);
        let b = &g * 0.5;
        let (lo, hi) = generalized_eigen_range(&b, &g);
        assert!((lo - 0.5).abs() < 1e-12 && (hi - 0.5).abs() < 1e-12);
    }
}
