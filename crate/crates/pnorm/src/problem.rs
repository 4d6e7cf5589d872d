//! Problem containers for the two regression forms:
//!
//! ```text
//! (image form)   minimize ‖Ax − b‖ₚᵖ   subject to Cx = v   (C, v optional)
//! (kernel form)  minimize ‖x‖ₚᵖ        subject to Aᵀx = b
//! ```
//!
//! with `A` an n×d sparse matrix, `n ≥ d`. The image form optimizes over
//! `x ∈ ℝᵈ`; the kernel form over `x ∈ ℝⁿ` with a d-dimensional
//! right-hand side.

use sparse_core::{DenseMatrix, SparseMatrix};

/// Which of the two regression forms a problem states.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Form {
    /// `min ‖Ax − b‖ₚᵖ` (optionally subject to `Cx = v`).
    Image,
    /// `min ‖x‖ₚᵖ` subject to `Aᵀx = b`.
    Kernel,
}

impl Form {
    /// Stable lowercase tag used in reports and on the command line.
    #[must_use]
    pub fn tag(self) -> &'static str {
        match self {
            Form::Image => "p1",
            Form::Kernel => "p2",
        }
    }
}

/// A p-norm regression instance in one of the two forms.
#[derive(Debug, Clone)]
pub struct RegressionProblem {
    /// The design matrix, n×d.
    pub a: SparseMatrix,
    /// Image form: target vector, length n. Kernel form: constraint
    /// right-hand side, length d.
    pub b: Vec<f64>,
    /// Optional square d×d constraint matrix (image form only).
    pub c: Option<DenseMatrix>,
    /// Constraint right-hand side, length d; present exactly when `c` is.
    pub v: Option<Vec<f64>>,
    /// The norm exponent, `p > 1`.
    pub p: f64,
    /// Which form the fields encode.
    pub form: Form,
}

impl RegressionProblem {
    /// Builds an unconstrained image-form instance `min ‖Ax − b‖ₚᵖ`.
    ///
    /// # Panics
    /// Panics if `b` does not have one entry per row of `a`, if any input
    /// is non-finite, or if `p ≤ 1`.
    #[must_use]
    pub fn image(a: SparseMatrix, b: Vec<f64>, p: f64) -> Self {
        check_exponent(p);
        assert_eq!(b.len(), a.n_rows(), "target length must equal the row count");
        check_finite(&b, "b");
        Self { a, b, c: None, v: None, p, form: Form::Image }
    }

    /// Builds a constrained image-form instance
    /// `min ‖Ax − b‖ₚᵖ s.t. Cx = v` with `C` square d×d.
    ///
    /// # Panics
    /// Panics on dimension mismatches, non-finite inputs, or `p ≤ 1`.
    #[must_use]
    pub fn image_constrained(
        a: SparseMatrix,
        b: Vec<f64>,
        c: DenseMatrix,
        v: Vec<f64>,
        p: f64,
    ) -> Self {
        check_exponent(p);
        let d = a.n_cols();
        assert_eq!(b.len(), a.n_rows(), "target length must equal the row count");
        assert_eq!(c.n_rows(), d, "constraint matrix must be square d×d");
        assert_eq!(c.n_cols(), d, "constraint matrix must be square d×d");
        assert_eq!(v.len(), d, "constraint right-hand side must have length d");
        check_finite(&b, "b");
        check_finite(c.data(), "c");
        check_finite(&v, "v");
        Self { a, b, c: Some(c), v: Some(v), p, form: Form::Image }
    }

    /// Builds a kernel-form instance `min ‖x‖ₚᵖ s.t. Aᵀx = b`.
    ///
    /// # Panics
    /// Panics if `b` does not have one entry per column of `a`, on
    /// non-finite inputs, or if `p ≤ 1`.
    #[must_use]
    pub fn kernel(a: SparseMatrix, b: Vec<f64>, p: f64) -> Self {
        check_exponent(p);
        assert_eq!(b.len(), a.n_cols(), "right-hand side length must equal the column count");
        check_finite(&b, "b");
        Self { a, b, c: None, v: None, p, form: Form::Kernel }
    }

    /// Length of a solution vector for this problem (d for the image
    /// form, n for the kernel form).
    #[must_use]
    pub fn solution_len(&self) -> usize {
        match self.form {
            Form::Image => self.a.n_cols(),
            Form::Kernel => self.a.n_rows(),
        }
    }

    /// Evaluates the objective `‖Ax − b‖ₚᵖ` (image) or `‖x‖ₚᵖ` (kernel)
    /// at `x`.
    ///
    /// # Panics
    /// Panics if `x` has the wrong length.
    #[must_use]
    pub fn objective(&self, x: &[f64]) -> f64 {
        assert_eq!(x.len(), self.solution_len(), "solution length mismatch");
        match self.form {
            Form::Image => {
                let mut r = vec![0.0; self.a.n_rows()];
                self.a.mul_vec(x, &mut r);
                r.iter()
                    .zip(&self.b)
                    .map(|(ri, bi)| (ri - bi).abs().powf(self.p))
                    .sum()
            }
            Form::Kernel => x.iter().map(|xi| xi.abs().powf(self.p)).sum(),
        }
    }

    /// Largest absolute violation of the problem's linear constraints at
    /// `x`: `max|Cx − v|` (image; 0 when unconstrained) or `max|Aᵀx − b|`
    /// (kernel).
    ///
    /// # Panics
    /// Panics if `x` has the wrong length.
    #[must_use]
    pub fn constraint_violation(&self, x: &[f64]) -> f64 {
        assert_eq!(x.len(), self.solution_len(), "solution length mismatch");
        match self.form {
            Form::Image => match (&self.c, &self.v) {
                (Some(c), Some(v)) => c
                    .matvec(x)
                    .iter()
                    .zip(v)
                    .map(|(ci, vi)| (ci - vi).abs())
                    .fold(0.0f64, f64::max),
                _ => 0.0,
            },
            Form::Kernel => {
                let mut atx = vec![0.0; self.a.n_cols()];
                self.a.mul_vec_t(x, &mut atx);
                atx.iter()
                    .zip(&self.b)
                    .map(|(ai, bi)| (ai - bi).abs())
                    .fold(0.0f64, f64::max)
            }
        }
    }
}

fn check_exponent(p: f64) {
    assert!(p.is_finite() && p > 1.0, "exponent must be finite and exceed 1, got {p}");
}

fn check_finite(values: &[f64], name: &str) {
    assert!(
        values.iter().all(|v| v.is_finite()),
        "{name} must be entirely finite"
    );
}

#[cfg(test)]
mod tests {
    use super::*;

    fn tiny() -> SparseMatrix {
        SparseMatrix::from_triplets(3, 2, &[(0, 0, 1.0), (1, 1, 2.0), (2, 0, -1.0)])
            .expect("valid triplets")
    }

    #[test]
    fn image_objective_matches_a_hand_computation() {
        let prob = RegressionProblem::image(tiny(), vec![1.0, 0.0, 1.0], 3.0);
        // x = (1, 1): residuals (0, 2, -2) → 0 + 8 + 8.
        let got = prob.objective(&[1.0, 1.0]);
        assert!((got - 16.0).abs() < 1e-12, "objective {got} != 16");
    }

    #[test]
    fn kernel_objective_and_violation_match_hand_values() {
        let prob = RegressionProblem::kernel(tiny(), vec![0.0, 2.0], 2.0);
        let x = [1.0, 1.0, 1.0];
        assert!((prob.objective(&x) - 3.0).abs() < 1e-12);
        // Aᵀx = (1·1 − 1·1, 2·1) = (0, 2) → feasible.
        assert!(prob.constraint_violation(&x) < 1e-12);
    }

    #[test]
    #[should_panic(expected = "exponent must be finite and exceed 1")]
    fn exponent_at_most_one_is_rejected() {
        let _ = RegressionProblem::image(tiny(), vec![0.0; 3], 1.0);
    }

    #[test]
    #[should_panic(expected = "constraint matrix must be square")]
    fn non_square_constraint_is_rejected() {
        let c = DenseMatrix::from_row_major(1, 2, vec![1.0, 1.0]);
        let _ = RegressionProblem::image_constrained(
            tiny(),
            vec![0.0; 3],
            c,
            vec![0.0, 0.0],
            2.0,
        );
    }
}
