//! Small dense helpers shared by the outer solvers: constraint
//! preprocessing and bordered saddle-point solves.
//!
//! Constraint matrices arrive as square d×d blocks that are frequently
//! rank-deficient by construction (zero padding rows), so every solve
//! here falls back to an SVD pseudo-inverse when plain LU cannot certify
//! its residual.

use nalgebra::{DMatrix, DVector};
use sparse_core::DenseMatrix;

use crate::error::PnormError;

/// A constraint block with its zero rows dropped.
#[derive(Debug, Clone)]
pub(crate) struct ActiveConstraints {
    /// m×d matrix of the nonzero constraint rows.
    pub rows: DMatrix<f64>,
    /// Right-hand side, length m.
    pub rhs: Vec<f64>,
}

impl ActiveConstraints {
    /// Extracts nonzero rows of `(c, v)`; a zero row with a nonzero
    /// target is immediately infeasible.
    ///
    /// # Errors
    /// [`PnormError::Infeasible`] for a zero row demanding a nonzero
    /// value.
    pub fn extract(
        c: &DenseMatrix,
        v: &[f64],
    ) -> Result<Option<Self>, PnormError> {
        let d = c.n_cols();
        let mut rows = Vec::new();
        let mut rhs = Vec::new();
        for i in 0..c.n_rows() {
            let row = c.row(i);
            if row.iter().any(|&x| x != 0.0) {
                rows.push(row.to_vec());
                rhs.push(v[i]);
            } else if v[i] != 0.0 {
                return Err(PnormError::Infeasible(format!(
                    "constraint row {i} is zero but its target is {}",
                    v[i]
                )));
            }
        }
        if rows.is_empty() {
            return Ok(None);
        }
        let m = rows.len();
        let flat: Vec<f64> = rows.into_iter().flatten().collect();
        Ok(Some(Self { rows: DMatrix::from_row_slice(m, d, &flat), rhs }))
    }

    /// Number of active rows.
    pub fn len(&self) -> usize {
        self.rows.nrows()
    }

    /// Largest absolute violation `max|Cx − v|` over the active rows.
    pub fn violation(&self, x: &[f64]) -> f64 {
        let cx = &self.rows * DVector::from_column_slice(x);
        cx.iter()
            .zip(&self.rhs)
            .map(|(ci, vi)| (ci - vi).abs())
            .fold(0.0f64, f64::max)
    }
}

/// Solves `m·x = rhs` by LU, falling back to the SVD pseudo-inverse;
/// `None` when even the pseudo-inverse solution fails its residual check
/// (genuinely inconsistent system).
pub(crate) fn solve_or_pinv(
    m: &DMatrix<f64>,
    rhs: &DVector<f64>,
) -> Option<DVector<f64>> {
    let scale = m.amax().max(rhs.amax()).max(1.0);
    if let Some(sol) = m.clone().lu().solve(rhs) {
        let residual = (m * &sol - rhs).amax();
        if residual.is_finite() && residual <= 1e-8 * scale {
            return Some(sol);
        }
    }
    let svd = m.clone().svd(true, true);
    let cutoff = 1e-13 * svd.singular_values.max().max(1e-300);
    let sol = svd.solve(rhs, cutoff).ok()?;
    let residual = (m * &sol - rhs).amax();
    if residual.is_finite() && residual <= 1e-6 * scale {
        Some(sol)
    } else {
        None
    }
}

/// Solves the bordered saddle-point system
///
/// ```text
/// [ H  Cᵀ ] [ s ]   [ g ]
/// [ C  0  ] [ μ ] = [ h ]
/// ```
///
/// returning only `s`; `constraints: None` solves `H·s = g` directly.
/// `None` when the system is numerically inconsistent.
pub(crate) fn bordered_solve(
    h: &DMatrix<f64>,
    constraints: Option<&ActiveConstraints>,
    g: &[f64],
    h_rhs: Option<&[f64]>,
) -> Option<Vec<f64>> {
    let d = h.nrows();
    match constraints {
        None => {
            let sol = solve_or_pinv(h, &DVector::from_column_slice(g))?;
            Some(sol.as_slice().to_vec())
        }
        Some(cons) => {
            let m = cons.len();
            let size = d + m;
            let mut sys = DMatrix::<f64>::zeros(size, size);
            sys.view_mut((0, 0), (d, d)).copy_from(h);
            for i in 0..m {
                for j in 0..d {
                    sys[(d + i, j)] = cons.rows[(i, j)];
                    sys[(j, d + i)] = cons.rows[(i, j)];
                }
            }
            let mut rhs = DVector::<f64>::zeros(size);
            rhs.as_mut_slice()[..d].copy_from_slice(g);
            if let Some(extra) = h_rhs {
                rhs.as_mut_slice()[d..].copy_from_slice(extra);
            }
            let sol = solve_or_pinv(&sys, &rhs)?;
            Some(sol.as_slice()[..d].to_vec())
        }
    }
}
