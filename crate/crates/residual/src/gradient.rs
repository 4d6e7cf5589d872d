//! Gradient of the p-th-power residual objective with respect to the
//! residual vector:
//!
//! ```text
//! g(x) = p · |Ax − b|^{p−2} ⊙ (Ax − b),
//! ```
//!
//! the elementwise derivative of `‖Ax − b‖_p^p`. For `p < 2` the power
//! `|·|^{p−2}` blows up at zero, so tiny residual magnitudes are floored
//! before exponentiation; exact zeros map to exact zeros for every `p`.

use sparse_core::SparseMatrix;

/// Magnitude floor applied inside `|·|^{p−2}` when `p < 2`.
pub const GRADIENT_MAGNITUDE_FLOOR: f64 = 1e-30;

/// Evaluates `p·|Ax − b|^{p−2} ⊙ (Ax − b)` coordinate-wise.
///
/// # Panics
/// Panics when dimensions disagree or `p ≤ 1`.
#[must_use]
pub fn residual_gradient(p: f64, x: &[f64], a: &SparseMatrix, b: &[f64]) -> Vec<f64> {
    assert!(p.is_finite() && p > 1.0, "exponent must exceed 1, got {p}");
    assert_eq!(x.len(), a.n_cols(), "x length {} != columns {}", x.len(), a.n_cols());
    assert_eq!(b.len(), a.n_rows(), "b length {} != rows {}", b.len(), a.n_rows());
    let mut res = vec![0.0; a.n_rows()];
    a.mul_vec(x, &mut res);
    for (ri, &bi) in res.iter_mut().zip(b) {
        *ri -= bi;
    }
    res.iter().map(|&ri| gradient_entry(p, ri)).collect()
}

/// One coordinate of the residual gradient.
fn gradient_entry(p: f64, r: f64) -> f64 {
    if r == 0.0 {
        return 0.0;
    }
    let magnitude = if p < 2.0 {
        r.abs().max(GRADIENT_MAGNITUDE_FLOOR)
    } else {
        r.abs()
    };
    p * magnitude.powf(p - 2.0) * r
}
