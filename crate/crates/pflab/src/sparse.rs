//! Compressed sparse row storage for the real operators assembled here, plus
//! the operator-application trait shared by explicit and matrix-free forms.

use crate::par;

/// A real sparse matrix in CSR format. Duplicate insertions are summed.
#[derive(Debug, Clone)]
pub struct Csr {
    n_rows: usize,
    n_cols: usize,
    row_ptr: Vec<usize>,
    col_idx: Vec<u32>,
    values: Vec<f64>,
}

/// Triplet accumulator used by all assembly code.
#[derive(Debug, Clone)]
pub struct TripletBuilder {
    n_rows: usize,
    n_cols: usize,
    entries: Vec<(u32, u32, f64)>,
}

impl TripletBuilder {
    pub fn new(n_rows: usize, n_cols: usize) -> Self {
        assert!(n_rows <= u32::MAX as usize && n_cols <= u32::MAX as usize);
        Self { n_rows, n_cols, entries: Vec::new() }
    }

    pub fn with_capacity(n_rows: usize, n_cols: usize, cap: usize) -> Self {
        let mut b = Self::new(n_rows, n_cols);
        b.entries.reserve(cap);
        b
    }

    pub fn push(&mut self, row: usize, col: usize, value: f64) {
        debug_assert!(row < self.n_rows && col < self.n_cols);
        self.entries.push((row as u32, col as u32, value));
    }

    /// Insert `(i, j, v)` and `(j, i, v)`; off-diagonal pairs share the exact
    /// same f64 so the result is symmetric by construction.
    pub fn push_sym(&mut self, row: usize, col: usize, value: f64) {
        self.push(row, col, value);
        if row != col {
            self.push(col, row, value);
        }
    }

    pub fn build(mut self) -> Csr {
        // Sort by (row, col) and merge duplicates. Stored zeros are kept so
        // that structural nonzero counts match the selection-rule counting.
        self.entries.sort_unstable_by_key(|&(r, c, _)| (r, c));
        let mut row_counts = vec![0usize; self.n_rows + 1];
        let mut col_idx: Vec<u32> = Vec::with_capacity(self.entries.len());
        let mut values: Vec<f64> = Vec::with_capacity(self.entries.len());
        let mut prev: Option<(u32, u32)> = None;
        for &(r, c, v) in &self.entries {
            if prev == Some((r, c)) {
                *values.last_mut().expect("merge follows a push") += v;
            } else {
                col_idx.push(c);
                values.push(v);
                row_counts[r as usize + 1] += 1;
                prev = Some((r, c));
            }
        }
        let mut row_ptr = row_counts;
        for r in 0..self.n_rows {
            row_ptr[r + 1] += row_ptr[r];
        }
        Csr { n_rows: self.n_rows, n_cols: self.n_cols, row_ptr, col_idx, values }
    }
}

impl Csr {
    pub fn n_rows(&self) -> usize {
        self.n_rows
    }

    pub fn n_cols(&self) -> usize {
        self.n_cols
    }

    /// Number of stored entries, including structural zeros.
    pub fn nnz(&self) -> usize {
        self.values.len()
    }

    pub fn get(&self, row: usize, col: usize) -> f64 {
        let lo = self.row_ptr[row];
        let hi = self.row_ptr[row + 1];
        match self.col_idx[lo..hi].binary_search(&(col as u32)) {
            Ok(k) => self.values[lo + k],
            Err(_) => 0.0,
        }
    }

    pub fn iter_row(&self, row: usize) -> impl Iterator<Item = (usize, f64)> + '_ {
        let lo = self.row_ptr[row];
        let hi = self.row_ptr[row + 1];
        self.col_idx[lo..hi]
            .iter()
            .zip(&self.values[lo..hi])
            .map(|(&c, &v)| (c as usize, v))
    }

    /// `out = A v`, rows in parallel.
    pub fn apply_into(&self, v: &[f64], out: &mut [f64]) {
        debug_assert_eq!(v.len(), self.n_cols);
        debug_assert_eq!(out.len(), self.n_rows);
        par::for_each_chunk_mut(out, |off, chunk| {
            for (k, o) in chunk.iter_mut().enumerate() {
                *o = self.row_dot(off + k, v);
            }
        });
    }

    /// `out = A v` computed sequentially; used inside already-parallel block
    /// loops where `v` and `out` are per-block slices.
    pub fn apply_rows_seq(&self, v: &[f64], out: &mut [f64]) {
        for (row, o) in out.iter_mut().enumerate() {
            *o = self.row_dot(row, v);
        }
    }

    #[inline]
    pub fn row_dot(&self, row: usize, v: &[f64]) -> f64 {
        let lo = self.row_ptr[row];
        let hi = self.row_ptr[row + 1];
        let mut s = 0.0;
        for k in lo..hi {
            s += self.values[k] * v[self.col_idx[k] as usize];
        }
        s
    }

    /// Bitwise structural symmetry: every stored (i, j, v) has a stored
    /// (j, i, v) with the identical value.
    pub fn is_symmetric_exact(&self) -> bool {
        if self.n_rows != self.n_cols {
            return false;
        }
        for row in 0..self.n_rows {
            for (col, v) in self.iter_row(row) {
                if self.get(col, row).to_bits() != v.to_bits() {
                    return false;
                }
            }
        }
        true
    }

    /// Max |A - A^T| entry, for antisymmetry checks on derivative stencils.
    pub fn max_symmetry_defect(&self) -> f64 {
        let mut worst = 0.0f64;
        for row in 0..self.n_rows {
            for (col, v) in self.iter_row(row) {
                worst = worst.max((v - self.get(col, row)).abs());
            }
        }
        worst
    }

    pub fn is_antisymmetric_exact(&self) -> bool {
        if self.n_rows != self.n_cols {
            return false;
        }
        for row in 0..self.n_rows {
            for (col, v) in self.iter_row(row) {
                if self.get(col, row) != -v {
                    return false;
                }
            }
        }
        true
    }

    pub fn to_dense(&self) -> nalgebra::DMatrix<f64> {
        let mut m = nalgebra::DMatrix::zeros(self.n_rows, self.n_cols);
        for row in 0..self.n_rows {
            for (col, v) in self.iter_row(row) {
                m[(row, col)] += v;
            }
        }
        m
    }
}

/// A real symmetric linear operator that can be applied to a vector.
pub trait SymOp: Sync {
    fn dim(&self) -> usize;

    /// `out = H v`. Parallel over rows/blocks when the `parallel` feature is on.
    fn apply_into(&self, v: &[f64], out: &mut [f64]);

    /// Always-sequential application, used by the benchmark suite to compare
    /// against the parallel path.
    fn apply_seq_into(&self, v: &[f64], out: &mut [f64]) {
        self.apply_into(v, out);
    }

    fn apply(&self, v: &[f64]) -> Vec<f64> {
        let mut out = vec![0.0; self.dim()];
        self.apply_into(v, &mut out);
        out
    }

    /// Densify by applying to unit vectors; intended for small dimensions.
    fn to_dense_matrix(&self) -> nalgebra::DMatrix<f64> {
        let n = self.dim();
        let mut m = nalgebra::DMatrix::zeros(n, n);
        let mut e = vec![0.0; n];
        let mut col = vec![0.0; n];
        for j in 0..n {
            e[j] = 1.0;
            self.apply_into(&e, &mut col);
            for i in 0..n {
                m[(i, j)] = col[i];
            }
            e[j] = 0.0;
        }
        m
    }
}

impl SymOp for Csr {
    fn dim(&self) -> usize {
        debug_assert_eq!(self.n_rows, self.n_cols);
        self.n_rows
    }

    fn apply_into(&self, v: &[f64], out: &mut [f64]) {
        Csr::apply_into(self, v, out);
    }

    fn apply_seq_into(&self, v: &[f64], out: &mut [f64]) {
        for row in 0..self.n_rows {
            out[row] = self.row_dot(row, v);
        }
    }
}
