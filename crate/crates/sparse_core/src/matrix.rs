use crate::{DenseMatrix, SparseCoreError};

/// A compressed sparse row (CSR) matrix of `f64`.
///
/// Invariants (maintained by every constructor):
/// * `row_offsets.len() == n_rows + 1`, monotone, starting at 0 and ending
///   at `values.len()`;
/// * within each row, column indices are strictly increasing;
/// * no explicit zeros are stored.
///
/// # Example
/// ```
/// use sparse_core::SparseMatrix;
///
/// // [[2, 0], [0, 3]] with a duplicate triplet summed into the (0,0) entry.
/// let a = SparseMatrix::from_triplets(2, 2, &[(0, 0, 1.0), (0, 0, 1.0), (1, 1, 3.0)]).unwrap();
/// assert_eq!(a.nnz(), 2);
/// assert_eq!(a.matvec(&[1.0, 1.0]).unwrap(), vec![2.0, 3.0]);
/// ```
#[derive(Debug, Clone, PartialEq)]
pub struct SparseMatrix {
    n_rows: usize,
    n_cols: usize,
    row_offsets: Vec<usize>,
    col_indices: Vec<usize>,
    values: Vec<f64>,
}

impl SparseMatrix {
    /// Builds a CSR matrix from unordered `(row, col, value)` triplets.
    ///
    /// Duplicate positions are summed; entries whose final sum is exactly
    /// zero are pruned, as are explicit zero triplets.
    ///
    /// # Errors
    /// [`SparseCoreError::TripletOutOfRange`] if any triplet addresses a
    /// position outside `n_rows x n_cols`.
    pub fn from_triplets(
        n_rows: usize,
        n_cols: usize,
        triplets: &[(usize, usize, f64)],
    ) -> Result<Self, SparseCoreError> {
        for &(r, c, _) in triplets {
            if r >= n_rows || c >= n_cols {
                return Err(SparseCoreError::TripletOutOfRange {
                    row: r,
                    col: c,
                    n_rows,
                    n_cols,
                });
            }
        }
        let mut order: Vec<usize> = (0..triplets.len()).collect();
        order.sort_by_key(|&k| (triplets[k].0, triplets[k].1));

        let mut row_offsets = vec![0usize; n_rows + 1];
        let mut col_indices = Vec::with_capacity(triplets.len());
        let mut values: Vec<f64> = Vec::with_capacity(triplets.len());
        let mut rows_of_kept: Vec<usize> = Vec::with_capacity(triplets.len());

        let mut k = 0;
        while k < order.len() {
            let (r, c, _) = triplets[order[k]];
            let mut sum = 0.0;
            while k < order.len() {
                let (r2, c2, v2) = triplets[order[k]];
                if r2 != r || c2 != c {
                    break;
                }
                sum += v2;
                k += 1;
            }
            if sum != 0.0 {
                rows_of_kept.push(r);
                col_indices.push(c);
                values.push(sum);
            }
        }
        for &r in &rows_of_kept {
            row_offsets[r + 1] += 1;
        }
        for i in 0..n_rows {
            row_offsets[i + 1] += row_offsets[i];
        }
        Ok(Self {
            n_rows,
            n_cols,
            row_offsets,
            col_indices,
            values,
        })
    }

    /// Builds the matrix directly from CSR arrays.
    ///
    /// # Panics
    /// Panics if the arrays violate the CSR invariants (offset shape,
    /// monotonicity, column order/range, explicit zeros).
    #[must_use]
    pub fn from_csr(
        n_rows: usize,
        n_cols: usize,
        row_offsets: Vec<usize>,
        col_indices: Vec<usize>,
        values: Vec<f64>,
    ) -> Self {
        assert_eq!(row_offsets.len(), n_rows + 1, "bad row_offsets length");
        assert_eq!(row_offsets[0], 0, "row_offsets must start at 0");
        assert_eq!(
            *row_offsets.last().unwrap(),
            values.len(),
            "row_offsets must end at nnz"
        );
        assert_eq!(col_indices.len(), values.len(), "index/value length mismatch");
        for i in 0..n_rows {
            assert!(row_offsets[i] <= row_offsets[i + 1], "offsets not monotone");
            let cols = &col_indices[row_offsets[i]..row_offsets[i + 1]];
            for w in cols.windows(2) {
                assert!(w[0] < w[1], "columns not strictly increasing in row {i}");
            }
            if let Some(&last) = cols.last() {
                assert!(last < n_cols, "column index out of range in row {i}");
            }
        }
        assert!(
            values.iter().all(|v| *v != 0.0),
            "explicit zeros are not stored"
        );
        Self {
            n_rows,
            n_cols,
            row_offsets,
            col_indices,
            values,
        }
    }

    /// The `n x n` identity.
    #[must_use]
    pub fn identity(n: usize) -> Self {
        Self {
            n_rows: n,
            n_cols: n,
            row_offsets: (0..=n).collect(),
            col_indices: (0..n).collect(),
            values: vec![1.0; n],
        }
    }

    /// A square diagonal matrix; zero diagonal entries are pruned.
    #[must_use]
    pub fn from_diagonal(diag: &[f64]) -> Self {
        let triplets: Vec<(usize, usize, f64)> = diag
            .iter()
            .enumerate()
            .map(|(i, &v)| (i, i, v))
            .collect();
        Self::from_triplets(diag.len(), diag.len(), &triplets)
            .expect("diagonal triplets are always in range")
    }

    /// Number of rows.
    #[must_use]
    pub fn n_rows(&self) -> usize {
        self.n_rows
    }

    /// Number of columns.
    #[must_use]
    pub fn n_cols(&self) -> usize {
        self.n_cols
    }

    /// Number of stored entries.
    #[must_use]
    pub fn nnz(&self) -> usize {
        self.values.len()
    }

    /// Row offset array (length `n_rows + 1`).
    #[must_use]
    pub fn row_offsets(&self) -> &[usize] {
        &self.row_offsets
    }

    /// Column indices of stored entries.
    #[must_use]
    pub fn col_indices(&self) -> &[usize] {
        &self.col_indices
    }

    /// Stored entry values.
    #[must_use]
    pub fn values(&self) -> &[f64] {
        &self.values
    }

    /// The column indices and values of row `i`.
    ///
    /// # Panics
    /// Panics if `i >= n_rows`.
    #[must_use]
    pub fn row(&self, i: usize) -> (&[usize], &[f64]) {
        assert!(i < self.n_rows, "row {i} out of range ({} rows)", self.n_rows);
        let lo = self.row_offsets[i];
        let hi = self.row_offsets[i + 1];
        (&self.col_indices[lo..hi], &self.values[lo..hi])
    }

    /// Sum of the `k` largest per-row nonzero counts: an upper bound on how
    /// many entries any `k` rows of the matrix can contribute.
    ///
    /// # Panics
    /// Panics unless `1 <= k <= n_rows`.
    #[must_use]
    pub fn nnz_d(&self, k: usize) -> usize {
        assert!(
            k >= 1 && k <= self.n_rows,
            "k = {k} outside 1..={}",
            self.n_rows
        );
        let mut counts: Vec<usize> = (0..self.n_rows)
            .map(|i| self.row_offsets[i + 1] - self.row_offsets[i])
            .collect();
        counts.sort_unstable_by(|a, b| b.cmp(a));
        counts[..k].iter().sum()
    }

    /// Matrix-vector product `A x`.
    ///
    /// # Errors
    /// [`SparseCoreError::DimensionMismatch`] if `x.len() != n_cols`.
    pub fn matvec(&self, x: &[f64]) -> Result<Vec<f64>, SparseCoreError> {
        if x.len() != self.n_cols {
            return Err(SparseCoreError::DimensionMismatch {
                context: "matvec",
                expected: self.n_cols,
                got: x.len(),
            });
        }
        let mut out = vec![0.0; self.n_rows];
        self.mul_vec(x, &mut out);
        Ok(out)
    }

    /// Transposed product `Aᵀ x`.
    ///
    /// # Errors
    /// [`SparseCoreError::DimensionMismatch`] if `x.len() != n_rows`.
    pub fn matvec_t(&self, x: &[f64]) -> Result<Vec<f64>, SparseCoreError> {
        if x.len() != self.n_rows {
            return Err(SparseCoreError::DimensionMismatch {
                context: "matvec_t",
                expected: self.n_rows,
                got: x.len(),
            });
        }
        let mut out = vec![0.0; self.n_cols];
        self.mul_vec_t(x, &mut out);
        Ok(out)
    }

    /// Hot-loop kernel: `out = A x` into a caller-provided buffer.
    ///
    /// # Panics
    /// Panics if the buffer lengths disagree with the matrix shape.
    pub fn mul_vec(&self, x: &[f64], out: &mut [f64]) {
        assert_eq!(x.len(), self.n_cols, "mul_vec operand length mismatch");
        assert_eq!(out.len(), self.n_rows, "mul_vec output length mismatch");
        for i in 0..self.n_rows {
            let lo = self.row_offsets[i];
            let hi = self.row_offsets[i + 1];
            let mut acc = 0.0;
            for k in lo..hi {
                acc += self.values[k] * x[self.col_indices[k]];
            }
            out[i] = acc;
        }
    }

    /// Hot-loop kernel: `out = Aᵀ x` into a caller-provided buffer.
    ///
    /// # Panics
    /// Panics if the buffer lengths disagree with the matrix shape.
    pub fn mul_vec_t(&self, x: &[f64], out: &mut [f64]) {
        assert_eq!(x.len(), self.n_rows, "mul_vec_t operand length mismatch");
        assert_eq!(out.len(), self.n_cols, "mul_vec_t output length mismatch");
        out.fill(0.0);
        for i in 0..self.n_rows {
            let xi = x[i];
            if xi == 0.0 {
                continue;
            }
            let lo = self.row_offsets[i];
            let hi = self.row_offsets[i + 1];
            for k in lo..hi {
                out[self.col_indices[k]] += self.values[k] * xi;
            }
        }
    }

    /// Materializes the matrix densely.
    #[must_use]
    pub fn to_dense(&self) -> DenseMatrix {
        let mut out = DenseMatrix::zeros(self.n_rows, self.n_cols);
        for i in 0..self.n_rows {
            let (cols, vals) = self.row(i);
            for (&c, &v) in cols.iter().zip(vals) {
                out[(i, c)] = v;
            }
        }
        out
    }

    /// The Gram matrix `Aᵀ A` as a dense `n_cols x n_cols` matrix.
    ///
    /// Intended for small column counts; cost is `O(Σᵢ nnz(rowᵢ)²)`.
    #[must_use]
    pub fn gram_dense(&self) -> DenseMatrix {
        self.weighted_gram_dense_impl(None)
    }

    /// The weighted Gram matrix `Aᵀ diag(w) A`.
    ///
    /// # Panics
    /// Panics if `w.len() != n_rows`.
    #[must_use]
    pub fn weighted_gram_dense(&self, w: &[f64]) -> DenseMatrix {
        assert_eq!(w.len(), self.n_rows, "weight vector length mismatch");
        self.weighted_gram_dense_impl(Some(w))
    }

    fn weighted_gram_dense_impl(&self, w: Option<&[f64]>) -> DenseMatrix {
        let d = self.n_cols;
        let mut out = DenseMatrix::zeros(d, d);
        for i in 0..self.n_rows {
            let wi = w.map_or(1.0, |w| w[i]);
            if wi == 0.0 {
                continue;
            }
            let (cols, vals) = self.row(i);
            for (&ca, &va) in cols.iter().zip(vals) {
                let wa = wi * va;
                for (&cb, &vb) in cols.iter().zip(vals) {
                    out[(ca, cb)] += wa * vb;
                }
            }
        }
        out
    }

    /// The transpose as a new CSR matrix.
    #[must_use]
    pub fn transpose(&self) -> SparseMatrix {
        let mut counts = vec![0usize; self.n_cols + 1];
        for &c in &self.col_indices {
            counts[c + 1] += 1;
        }
        for j in 0..self.n_cols {
            counts[j + 1] += counts[j];
        }
        let row_offsets = counts.clone();
        let mut cursor = counts;
        let mut col_indices = vec![0usize; self.nnz()];
        let mut values = vec![0.0; self.nnz()];
        for i in 0..self.n_rows {
            let (cols, vals) = self.row(i);
            for (&c, &v) in cols.iter().zip(vals) {
                let slot = cursor[c];
                cursor[c] += 1;
                col_indices[slot] = i;
                values[slot] = v;
            }
        }
        SparseMatrix {
            n_rows: self.n_cols,
            n_cols: self.n_rows,
            row_offsets,
            col_indices,
            values,
        }
    }

    /// Extracts rows `indices[k]`, each multiplied by `scales[k]`, in the
    /// given order.
    ///
    /// # Panics
    /// Panics if the slices have different lengths or an index is out of
    /// range.
    #[must_use]
    pub fn select_scaled_rows(&self, indices: &[usize], scales: &[f64]) -> SparseMatrix {
        assert_eq!(indices.len(), scales.len(), "index/scale length mismatch");
        let mut row_offsets = Vec::with_capacity(indices.len() + 1);
        row_offsets.push(0usize);
        let mut col_indices = Vec::new();
        let mut values = Vec::new();
        for (&i, &s) in indices.iter().zip(scales) {
            assert!(i < self.n_rows, "row index {i} out of range");
            let (cols, vals) = self.row(i);
            for (&c, &v) in cols.iter().zip(vals) {
                let sv = s * v;
                if sv != 0.0 {
                    col_indices.push(c);
                    values.push(sv);
                }
            }
            row_offsets.push(values.len());
        }
        SparseMatrix {
            n_rows: indices.len(),
            n_cols: self.n_cols,
            row_offsets,
            col_indices,
            values,
        }
    }

    /// A copy with row `i` multiplied by `scales[i]`; zero scales prune the
    /// row's entries.
    ///
    /// # Panics
    /// Panics if `scales.len() != n_rows`.
    #[must_use]
    pub fn scale_rows(&self, scales: &[f64]) -> SparseMatrix {
        assert_eq!(scales.len(), self.n_rows, "scale vector length mismatch");
        let all: Vec<usize> = (0..self.n_rows).collect();
        let mut out = self.select_scaled_rows(&all, scales);
        out.n_rows = self.n_rows;
        out
    }
}
