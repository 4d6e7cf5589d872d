//! Inverse maintenance under drifting diagonal weights: a frozen base
//! factorization `Y ≈ (Aᵀ diag(1/r̂) A)⁻¹` plus a dense low-rank correction
//! `Q` accumulated with Sherman–Morrison–Woodbury updates, so that `Y + Q`
//! tracks the inverse as individual entries of the band diagonal move —
//! with periodic full rebuilds on a configurable schedule.

use sparse_core::{DenseMatrix, SparseMatrix};

use crate::inverse::{build_inverse_operator, ApplyInverse, InverseOperator};
use crate::LinearSolverError;

/// Condition estimate above which a low-rank update is rejected.
pub const UPDATE_CONDITION_LIMIT: f64 = 1e12;

/// One accepted low-rank update.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct UpdateRecord {
    /// Rank (column count of U) of the update.
    pub rank: usize,
    /// Value of the iteration counter when the update was applied.
    pub at_iteration: usize,
}

/// `Y + Q ≈ (Aᵀ diag(1/r̂) A)⁻¹` with `r̂` the reference band diagonal.
pub struct MaintainedInverse {
    a: SparseMatrix,
    base: InverseOperator,
    correction: DenseMatrix,
    reference_weights: Vec<f64>,
    update_log: Vec<UpdateRecord>,
    period: Option<usize>,
    counter: usize,
    tol: f64,
}

/// Computes the Sherman–Morrison–Woodbury correction for adding `U C Uᵀ` to
/// the inverted target: given `apply_m(b) ≈ M⁻¹ b`, the returned matrix `Δ`
/// satisfies `M⁻¹ + Δ ≈ (M + U C Uᵀ)⁻¹`, namely
///
/// ```text
/// Δ = −V (C⁻¹ + Uᵀ V)⁻¹ Vᵀ     with  V = M⁻¹ U.
/// ```
///
/// # Errors
/// [`LinearSolverError::RebuildRequired`] when `C` or the inner system
/// `C⁻¹ + UᵀV` is singular or has condition estimate above
/// [`UPDATE_CONDITION_LIMIT`].
pub fn smw_correction(
    apply_m: &dyn Fn(&[f64]) -> Vec<f64>,
    dim: usize,
    u: &DenseMatrix,
    c: &DenseMatrix,
) -> Result<DenseMatrix, LinearSolverError> {
    assert_eq!(u.n_rows(), dim, "U must have one row per dimension");
    assert_eq!(c.n_rows(), c.n_cols(), "C must be square");
    assert_eq!(c.n_rows(), u.n_cols(), "C must match U's column count");
    let k = u.n_cols();
    if k == 0 {
        return Ok(DenseMatrix::zeros(dim, dim));
    }

    use nalgebra::DMatrix;
    let c_na = DMatrix::from_row_slice(k, k, c.data());
    let c_svd = c_na.clone().svd(true, true);
    let c_max = c_svd.singular_values.max();
    let c_min = c_svd.singular_values.min();
    if c_min <= 0.0 || c_max / c_min > UPDATE_CONDITION_LIMIT {
        return Err(LinearSolverError::RebuildRequired {
            condition: if c_min > 0.0 { c_max / c_min } else { f64::INFINITY },
        });
    }
    let c_inv = c_na
        .lu()
        .try_inverse()
        .ok_or(LinearSolverError::RebuildRequired {
            condition: f64::INFINITY,
        })?;

    // V = M⁻¹U, column by column.
    let mut v = DMatrix::<f64>::zeros(dim, k);
    let mut col = vec![0.0; dim];
    for j in 0..k {
        for i in 0..dim {
            col[i] = u[(i, j)];
        }
        let y = apply_m(&col);
        for i in 0..dim {
            v[(i, j)] = y[i];
        }
    }
    let u_na = DMatrix::from_fn(dim, k, |i, j| u[(i, j)]);
    let inner = c_inv + u_na.transpose() * &v;
    let inner_svd = inner.clone().svd(false, false);
    let s_max = inner_svd.singular_values.max();
    let s_min = inner_svd.singular_values.min();
    if s_min <= 0.0 || s_max / s_min > UPDATE_CONDITION_LIMIT {
        return Err(LinearSolverError::RebuildRequired {
            condition: if s_min > 0.0 { s_max / s_min } else { f64::INFINITY },
        });
    }
    let inner_inv = inner
        .lu()
        .try_inverse()
        .ok_or(LinearSolverError::RebuildRequired {
            condition: s_max / s_min,
        })?;
    let delta = -(&v * inner_inv * v.transpose());

    // Symmetrize to suppress round-off drift.
    let mut out = DenseMatrix::zeros(dim, dim);
    for i in 0..dim {
        for j in 0..dim {
            out[(i, j)] = 0.5 * (delta[(i, j)] + delta[(j, i)]);
        }
    }
    Ok(out)
}

impl MaintainedInverse {
    /// Builds the maintained inverse for the band diagonal `r`, targeting
    /// `(Aᵀ diag(1/r) A)⁻¹` with the given rebuild `period` (`None` means
    /// pure update maintenance with no scheduled rebuilds).
    ///
    /// # Errors
    /// Propagates build failures from the base factorization.
    ///
    /// # Panics
    /// Panics if `r` has a non-positive entry or the wrong length.
    pub fn new(
        a: &SparseMatrix,
        r: &[f64],
        period: Option<usize>,
        tol: f64,
    ) -> Result<Self, LinearSolverError> {
        assert_eq!(r.len(), a.n_rows(), "one band entry per row required");
        assert!(
            r.iter().all(|&ri| ri > 0.0 && ri.is_finite()),
            "band diagonal must be positive and finite"
        );
        if let Some(p) = period {
            assert!(p > 0, "rebuild period must be positive");
        }
        let w: Vec<f64> = r.iter().map(|ri| 1.0 / ri).collect();
        let base = build_inverse_operator(a, &w, tol)?;
        let d = a.n_cols();
        Ok(Self {
            a: a.clone(),
            base,
            correction: DenseMatrix::zeros(d, d),
            reference_weights: r.to_vec(),
            update_log: Vec::new(),
            period,
            counter: 0,
            tol,
        })
    }

    /// The reference band diagonal `r̂` the current `Y + Q` targets.
    #[must_use]
    pub fn reference_weights(&self) -> &[f64] {
        &self.reference_weights
    }

    /// Accepted updates since the last rebuild.
    #[must_use]
    pub fn update_log(&self) -> &[UpdateRecord] {
        &self.update_log
    }

    /// The dense correction matrix `Q`.
    #[must_use]
    pub fn correction(&self) -> &DenseMatrix {
        &self.correction
    }

    /// Error bound declared by the frozen base factorization.
    #[must_use]
    pub fn base_error_bound(&self) -> f64 {
        self.base.error_bound()
    }

    /// Multiplicative band between a current diagonal `r` and the reference
    /// `r̂`: `max_j max(rⱼ/r̂ⱼ, r̂ⱼ/rⱼ)`.
    ///
    /// # Panics
    /// Panics if `r` has the wrong length or a non-positive entry.
    #[must_use]
    pub fn band_width(&self, r: &[f64]) -> f64 {
        assert_eq!(r.len(), self.reference_weights.len(), "length mismatch");
        let mut band = 1.0f64;
        for (&ri, &hi) in r.iter().zip(&self.reference_weights) {
            assert!(ri > 0.0, "band diagonal must be positive");
            band = band.max(ri / hi).max(hi / ri);
        }
        band
    }

    /// Applies one generic Sherman–Morrison–Woodbury update: the maintained
    /// target gains `U C Uᵀ` and `Q` absorbs the matching correction. The
    /// reference weights are *not* touched; use [`Self::update_rows`] for
    /// row-indexed band moves.
    ///
    /// # Errors
    /// [`LinearSolverError::RebuildRequired`] when the inner system is too
    /// ill-conditioned; the state is left unchanged in that case.
    pub fn smw_update(
        &mut self,
        u: &DenseMatrix,
        c: &DenseMatrix,
    ) -> Result<(), LinearSolverError> {
        let apply = |b: &[f64]| self.apply(b);
        let delta = smw_correction(&apply, self.a.n_cols(), u, c)?;
        self.correction.add_assign_scaled(&delta, 1.0);
        self.update_log.push(UpdateRecord {
            rank: u.n_cols(),
            at_iteration: self.counter,
        });
        Ok(())
    }

    /// Moves the reference band entries at `rows` to `r_new` by one
    /// rank-|rows| update: `U` collects the corresponding rows of `A` and
    /// `C = diag(1/r_new − 1/r̂)`. Rows whose band entry is unchanged are
    /// skipped; on success the reference weights are updated.
    ///
    /// # Errors
    /// [`LinearSolverError::RebuildRequired`] as for [`Self::smw_update`].
    ///
    /// # Panics
    /// Panics on out-of-range rows, length mismatch, or non-positive values.
    pub fn update_rows(
        &mut self,
        rows: &[usize],
        r_new: &[f64],
    ) -> Result<(), LinearSolverError> {
        assert_eq!(rows.len(), r_new.len(), "one new value per row required");
        let d = self.a.n_cols();
        let mut kept: Vec<(usize, f64, f64)> = Vec::new();
        for (&row, &val) in rows.iter().zip(r_new) {
            assert!(row < self.a.n_rows(), "row {row} out of range");
            assert!(val > 0.0 && val.is_finite(), "band values must be positive");
            let diff = 1.0 / val - 1.0 / self.reference_weights[row];
            if diff != 0.0 {
                kept.push((row, val, diff));
            }
        }
        if kept.is_empty() {
            return Ok(());
        }
        let k = kept.len();
        let mut u = DenseMatrix::zeros(d, k);
        let mut c = DenseMatrix::zeros(k, k);
        for (j, &(row, _, diff)) in kept.iter().enumerate() {
            let (cols, vals) = self.a.row(row);
            for (&ci, &vi) in cols.iter().zip(vals) {
                u[(ci, j)] = vi;
            }
            c[(j, j)] = diff;
        }
        self.smw_update(&u, &c)?;
        for &(row, val, _) in &kept {
            self.reference_weights[row] = val;
        }
        Ok(())
    }

    /// Rebuilds `Y` from the given band diagonal, zeroes `Q`, resets the
    /// reference weights, and clears the update log.
    ///
    /// # Errors
    /// Propagates base build failures; the previous state is lost only on
    /// success.
    pub fn rebuild(&mut self, r: &[f64]) -> Result<(), LinearSolverError> {
        assert_eq!(r.len(), self.a.n_rows(), "one band entry per row required");
        let w: Vec<f64> = r.iter().map(|ri| 1.0 / ri).collect();
        let base = build_inverse_operator(&self.a, &w, self.tol)?;
        self.base = base;
        self.correction = DenseMatrix::zeros(self.a.n_cols(), self.a.n_cols());
        self.reference_weights = r.to_vec();
        self.update_log.clear();
        Ok(())
    }

    /// Advances the iteration counter and rebuilds from `r` when the counter
    /// sits on the configured schedule (so a schedule of `k` rebuilds on
    /// iterations 0, k, 2k, …). Returns whether a rebuild happened, so the
    /// caller can reset any bookkeeping tied to the old factorization.
    ///
    /// # Errors
    /// Propagates rebuild failures.
    pub fn rebuild_if_due(&mut self, r: &[f64]) -> Result<bool, LinearSolverError> {
        let due = match self.period {
            Some(p) => self.counter % p == 0,
            None => false,
        };
        self.counter += 1;
        if due {
            self.rebuild(r)?;
        }
        Ok(due)
    }

    /// The number of times [`Self::rebuild_if_due`] has been called.
    #[must_use]
    pub fn iterations_seen(&self) -> usize {
        self.counter
    }
}

impl ApplyInverse for MaintainedInverse {
    fn dim(&self) -> usize {
        self.a.n_cols()
    }

    fn apply(&self, rhs: &[f64]) -> Vec<f64> {
        let mut out = self.base.apply(rhs);
        let qb = self.correction.matvec(rhs);
        for (o, q) in out.iter_mut().zip(&qb) {
            *o += q;
        }
        out
    }
}
