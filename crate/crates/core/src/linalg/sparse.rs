use std::io::Write;

use nalgebra::DMatrix;

use crate::error::{Error, Result};

/// Dense conversions beyond this many entries are refused.
pub const DENSE_GUARD: usize = 10_000_000;

/// Compressed sparse row matrix with sorted, duplicate-free rows.
///
/// Explicit zeros produced by assembly are kept so that the sparsity pattern
/// of an assembled operator does not depend on coefficient values.
#[derive(Debug, Clone, PartialEq)]
pub struct SparseMatrix {
    nrows: usize,
    ncols: usize,
    row_ptr: Vec<usize>,
    col_idx: Vec<usize>,
    values: Vec<f64>,
}

impl SparseMatrix {
    pub fn zeros(nrows: usize, ncols: usize) -> Self {
        SparseMatrix {
            nrows,
            ncols,
            row_ptr: vec![0; nrows + 1],
            col_idx: Vec::new(),
            values: Vec::new(),
        }
    }

    pub fn identity(n: usize) -> Self {
        Self::from_diagonal(&vec![1.0; n])
    }

    pub fn from_diagonal(diag: &[f64]) -> Self {
        let n = diag.len();
        SparseMatrix {
            nrows: n,
            ncols: n,
            row_ptr: (0..=n).collect(),
            col_idx: (0..n).collect(),
            values: diag.to_vec(),
        }
    }

    /// Builds a matrix from `(row, col, value)` triplets, summing duplicates.
    pub fn from_triplets(nrows: usize, ncols: usize, triplets: &[(usize, usize, f64)]) -> Result<Self> {
        let mut counts = vec![0usize; nrows + 1];
        for &(r, c, _) in triplets {
            if r >= nrows || c >= ncols {
                return Err(Error::IndexOutOfRange {
                    row: r,
                    col: c,
                    rows: nrows,
                    cols: ncols,
                });
            }
            counts[r + 1] += 1;
        }
        for i in 0..nrows {
            counts[i + 1] += counts[i];
        }
        let mut next = counts.clone();
        let mut bucket: Vec<(usize, f64)> = vec![(0, 0.0); triplets.len()];
        for &(r, c, v) in triplets {
            bucket[next[r]] = (c, v);
            next[r] += 1;
        }

        let mut row_ptr = Vec::with_capacity(nrows + 1);
        let mut col_idx = Vec::with_capacity(triplets.len());
        let mut values = Vec::with_capacity(triplets.len());
        row_ptr.push(0);
        for i in 0..nrows {
            let row = &mut bucket[counts[i]..counts[i + 1]];
            row.sort_by_key(|&(c, _)| c);
            let mut last = usize::MAX;
            for &(c, v) in row.iter() {
                if c == last {
                    *values.last_mut().unwrap() += v;
                } else {
                    col_idx.push(c);
                    values.push(v);
                    last = c;
                }
            }
            row_ptr.push(col_idx.len());
        }
        Ok(SparseMatrix {
            nrows,
            ncols,
            row_ptr,
            col_idx,
            values,
        })
    }

    pub fn from_dense(m: &DMatrix<f64>) -> Self {
        let mut trip = Vec::new();
        for i in 0..m.nrows() {
            for j in 0..m.ncols() {
                if m[(i, j)] != 0.0 {
                    trip.push((i, j, m[(i, j)]));
                }
            }
        }
        Self::from_triplets(m.nrows(), m.ncols(), &trip).expect("indices in range")
    }

    pub fn nrows(&self) -> usize {
        self.nrows
    }

    pub fn ncols(&self) -> usize {
        self.ncols
    }

    pub fn shape(&self) -> (usize, usize) {
        (self.nrows, self.ncols)
    }

    pub fn nnz(&self) -> usize {
        self.values.len()
    }

    pub fn row_ptr(&self) -> &[usize] {
        &self.row_ptr
    }

    pub fn col_indices(&self) -> &[usize] {
        &self.col_idx
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    /// Column indices and values of row `i`.
    pub fn row(&self, i: usize) -> (&[usize], &[f64]) {
        let (s, e) = (self.row_ptr[i], self.row_ptr[i + 1]);
        (&self.col_idx[s..e], &self.values[s..e])
    }

    pub fn get(&self, i: usize, j: usize) -> f64 {
        let (cols, vals) = self.row(i);
        match cols.binary_search(&j) {
            Ok(k) => vals[k],
            Err(_) => 0.0,
        }
    }

    pub fn diagonal(&self) -> Vec<f64> {
        (0..self.nrows.min(self.ncols)).map(|i| self.get(i, i)).collect()
    }

    pub fn spmv(&self, x: &[f64]) -> Vec<f64> {
        let mut y = vec![0.0; self.nrows];
        self.spmv_add(1.0, x, &mut y);
        y
    }

    /// `y += alpha * self * x`.
    pub fn spmv_add(&self, alpha: f64, x: &[f64], y: &mut [f64]) {
        assert_eq!(x.len(), self.ncols, "spmv: x has wrong length");
        assert_eq!(y.len(), self.nrows, "spmv: y has wrong length");
        for (i, yi) in y.iter_mut().enumerate() {
            let (cols, vals) = self.row(i);
            let s: f64 = cols.iter().zip(vals).map(|(&c, &v)| v * x[c]).sum();
            *yi += alpha * s;
        }
    }

    pub fn transpose(&self) -> Self {
        let mut counts = vec![0usize; self.ncols + 1];
        for &c in &self.col_idx {
            counts[c + 1] += 1;
        }
        for j in 0..self.ncols {
            counts[j + 1] += counts[j];
        }
        let mut next = counts.clone();
        let mut col_idx = vec![0; self.nnz()];
        let mut values = vec![0.0; self.nnz()];
        for i in 0..self.nrows {
            let (cols, vals) = self.row(i);
            for (&c, &v) in cols.iter().zip(vals) {
                col_idx[next[c]] = i;
                values[next[c]] = v;
                next[c] += 1;
            }
        }
        SparseMatrix {
            nrows: self.ncols,
            ncols: self.nrows,
            row_ptr: counts,
            col_idx,
            values,
        }
    }

    pub fn scale(&self, a: f64) -> Self {
        let mut out = self.clone();
        out.values.iter_mut().for_each(|v| *v *= a);
        out
    }

    /// Linear combination `sum_k coeff_k * m_k` over matrices of equal shape.
    /// The result pattern is the union of the input patterns.
    pub fn linear_combination(terms: &[(f64, &SparseMatrix)]) -> Result<Self> {
        let (nrows, ncols) = match terms.first() {
            Some((_, m)) => m.shape(),
            None => return Err(Error::DimensionMismatch("empty linear combination".into())),
        };
        if let Some((_, m)) = terms.iter().find(|(_, m)| m.shape() != (nrows, ncols)) {
            return Err(Error::DimensionMismatch(format!(
                "cannot combine {}x{} with {}x{}",
                nrows,
                ncols,
                m.nrows(),
                m.ncols()
            )));
        }
        let mut row_ptr = Vec::with_capacity(nrows + 1);
        let mut col_idx = Vec::new();
        let mut values = Vec::new();
        let mut acc = vec![0.0; ncols];
        let mut seen = vec![false; ncols];
        let mut touched = Vec::new();
        row_ptr.push(0);
        for i in 0..nrows {
            for (a, m) in terms {
                let (cols, vals) = m.row(i);
                for (&c, &v) in cols.iter().zip(vals) {
                    if !seen[c] {
                        seen[c] = true;
                        touched.push(c);
                    }
                    acc[c] += a * v;
                }
            }
            touched.sort_unstable();
            for &c in &touched {
                col_idx.push(c);
                values.push(acc[c]);
                acc[c] = 0.0;
                seen[c] = false;
            }
            touched.clear();
            row_ptr.push(col_idx.len());
        }
        Ok(SparseMatrix {
            nrows,
            ncols,
            row_ptr,
            col_idx,
            values,
        })
    }

    /// `a * self + b * other`.
    pub fn add(&self, a: f64, other: &SparseMatrix, b: f64) -> Result<Self> {
        Self::linear_combination(&[(a, self), (b, other)])
    }

    /// Sparse product `self * other` (row-by-row Gustavson).
    pub fn matmul(&self, other: &SparseMatrix) -> Result<Self> {
        if self.ncols != other.nrows {
            return Err(Error::DimensionMismatch(format!(
                "product of {}x{} and {}x{}",
                self.nrows, self.ncols, other.nrows, other.ncols
            )));
        }
        let mut trip = Vec::new();
        let mut acc = vec![0.0; other.ncols];
        let mut seen = vec![false; other.ncols];
        let mut touched = Vec::new();
        for i in 0..self.nrows {
            let (cols, vals) = self.row(i);
            for (&k, &a) in cols.iter().zip(vals) {
                let (ocols, ovals) = other.row(k);
                for (&j, &b) in ocols.iter().zip(ovals) {
                    if !seen[j] {
                        seen[j] = true;
                        touched.push(j);
                    }
                    acc[j] += a * b;
                }
            }
            for &j in &touched {
                trip.push((i, j, acc[j]));
                acc[j] = 0.0;
                seen[j] = false;
            }
            touched.clear();
        }
        Self::from_triplets(self.nrows, other.ncols, &trip)
    }

    /// Keeps entries `(i, j)` with `keep_row[i] && keep_col[j]`; every other
    /// entry is dropped from the pattern.
    pub fn mask(&self, keep_row: &[bool], keep_col: &[bool]) -> Self {
        let mut row_ptr = Vec::with_capacity(self.nrows + 1);
        let mut col_idx = Vec::new();
        let mut values = Vec::new();
        row_ptr.push(0);
        for i in 0..self.nrows {
            if keep_row[i] {
                let (cols, vals) = self.row(i);
                for (&c, &v) in cols.iter().zip(vals) {
                    if keep_col[c] {
                        col_idx.push(c);
                        values.push(v);
                    }
                }
            }
            row_ptr.push(col_idx.len());
        }
        SparseMatrix {
            nrows: self.nrows,
            ncols: self.ncols,
            row_ptr,
            col_idx,
            values,
        }
    }

    /// Extracts the submatrix with the given rows and columns.
    pub fn submatrix(&self, rows: &[usize], cols: &[usize]) -> Self {
        let mut col_map = vec![usize::MAX; self.ncols];
        for (k, &c) in cols.iter().enumerate() {
            col_map[c] = k;
        }
        let mut trip = Vec::new();
        for (k, &r) in rows.iter().enumerate() {
            let (rc, rv) = self.row(r);
            for (&c, &v) in rc.iter().zip(rv) {
                if col_map[c] != usize::MAX {
                    trip.push((k, col_map[c], v));
                }
            }
        }
        Self::from_triplets(rows.len(), cols.len(), &trip).expect("indices in range")
    }

    /// Symmetric permutation `P A P^T` where `perm[new] = old`.
    pub fn permute_symmetric(&self, perm: &[usize]) -> Self {
        let mut inv = vec![0; perm.len()];
        for (new, &old) in perm.iter().enumerate() {
            inv[old] = new;
        }
        let mut trip = Vec::with_capacity(self.nnz());
        for (new_r, &old_r) in perm.iter().enumerate() {
            let (cols, vals) = self.row(old_r);
            for (&c, &v) in cols.iter().zip(vals) {
                trip.push((new_r, inv[c], v));
            }
        }
        Self::from_triplets(self.nrows, self.ncols, &trip).expect("indices in range")
    }

    pub fn max_abs(&self) -> f64 {
        self.values.iter().fold(0.0, |m, v| m.max(v.abs()))
    }

    /// Frobenius norm.
    pub fn norm_fro(&self) -> f64 {
        self.values.iter().map(|v| v * v).sum::<f64>().sqrt()
    }

    pub fn is_symmetric(&self, rel_tol: f64) -> bool {
        if self.nrows != self.ncols {
            return false;
        }
        let tol = rel_tol * self.max_abs();
        (0..self.nrows).all(|i| {
            let (cols, vals) = self.row(i);
            cols.iter()
                .zip(vals)
                .all(|(&j, &v)| (v - self.get(j, i)).abs() <= tol)
        })
    }

    pub fn to_dense(&self) -> Result<DMatrix<f64>> {
        if self.nrows.saturating_mul(self.ncols) > DENSE_GUARD {
            return Err(Error::TooLargeForDense {
                rows: self.nrows,
                cols: self.ncols,
            });
        }
        let mut d = DMatrix::zeros(self.nrows, self.ncols);
        for i in 0..self.nrows {
            let (cols, vals) = self.row(i);
            for (&j, &v) in cols.iter().zip(vals) {
                d[(i, j)] = v;
            }
        }
        Ok(d)
    }

    /// Writes the matrix in MatrixMarket coordinate format (1-based indices).
    pub fn write_matrix_market<W: Write>(&self, mut w: W) -> Result<()> {
        writeln!(w, "%%MatrixMarket matrix coordinate real general")?;
        writeln!(w, "{} {} {}", self.nrows, self.ncols, self.nnz())?;
        for i in 0..self.nrows {
            let (cols, vals) = self.row(i);
            for (&j, &v) in cols.iter().zip(vals) {
                writeln!(w, "{} {} {:.17e}", i + 1, j + 1, v)?;
            }
        }
        Ok(())
    }
}

/// Free-function form of [`SparseMatrix::from_triplets`].
pub fn assemble_from_triplets(triplets: &[(usize, usize, f64)], shape: (usize, usize)) -> Result<SparseMatrix> {
    SparseMatrix::from_triplets(shape.0, shape.1, triplets)
}

pub fn to_dense(m: &SparseMatrix) -> Result<DMatrix<f64>> {
    m.to_dense()
}

pub fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

pub fn norm2(a: &[f64]) -> f64 {
    dot(a, a).sqrt()
}
