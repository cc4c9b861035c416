//! Direct factorizations on bandwidth-reduced orderings.

use super::ordering::{bandwidth, reverse_cuthill_mckee};
use super::SparseMatrix;
use crate::error::{Error, Result};

/// Envelope (variable-band) Cholesky factorization `P A P^T = L L^T`.
#[derive(Debug, Clone)]
pub struct SkylineCholesky {
    perm: Vec<usize>,
    first: Vec<usize>,
    start: Vec<usize>,
    data: Vec<f64>,
}

impl SkylineCholesky {
    /// Factors a symmetric positive definite matrix after RCM reordering.
    /// Only the lower triangle of `m` is read.
    pub fn factor(m: &SparseMatrix) -> Result<Self> {
        let perm = reverse_cuthill_mckee(m);
        Self::factor_with_permutation(m, perm)
    }

    pub fn factor_with_permutation(m: &SparseMatrix, perm: Vec<usize>) -> Result<Self> {
        let n = m.nrows();
        if m.ncols() != n || perm.len() != n {
            return Err(Error::DimensionMismatch(format!(
                "Cholesky of a {}x{} matrix with a permutation of length {}",
                n,
                m.ncols(),
                perm.len()
            )));
        }
        let mut inv = vec![0; n];
        for (new, &old) in perm.iter().enumerate() {
            inv[old] = new;
        }

        // Row i of the permuted lower triangle spans columns first[i]..=i.
        let mut first: Vec<usize> = (0..n).collect();
        for old in 0..n {
            let i = inv[old];
            let (cols, _) = m.row(old);
            for &c in cols {
                let j = inv[c];
                if j < i {
                    first[i] = first[i].min(j);
                }
            }
        }
        let mut start = Vec::with_capacity(n + 1);
        start.push(0);
        for i in 0..n {
            start.push(start[i] + i - first[i] + 1);
        }
        let mut data = vec![0.0; start[n]];
        for old in 0..n {
            let i = inv[old];
            let (cols, vals) = m.row(old);
            for (&c, &v) in cols.iter().zip(vals) {
                let j = inv[c];
                if j <= i {
                    data[start[i] + j - first[i]] += v;
                }
            }
        }

        for i in 0..n {
            let fi = first[i];
            let row_i = start[i];
            for j in fi..i {
                let fj = first[j];
                let k0 = fi.max(fj);
                let row_j = start[j];
                let li = &data[row_i + k0 - fi..row_i + j - fi];
                let lj = &data[row_j + k0 - fj..row_j + j - fj];
                let s: f64 = li.iter().zip(lj).map(|(a, b)| a * b).sum();
                let diag_j = data[row_j + j - fj];
                data[row_i + j - fi] = (data[row_i + j - fi] - s) / diag_j;
            }
            let li = &data[row_i..row_i + i - fi];
            let s: f64 = li.iter().map(|a| a * a).sum();
            let d = data[row_i + i - fi] - s;
            if !(d > 0.0) {
                return Err(Error::NotPositiveDefinite {
                    pivot: perm[i],
                    value: d,
                });
            }
            data[row_i + i - fi] = d.sqrt();
        }
        Ok(SkylineCholesky {
            perm,
            first,
            start,
            data,
        })
    }

    pub fn dim(&self) -> usize {
        self.perm.len()
    }

    /// Stored entries of the factor.
    pub fn envelope_size(&self) -> usize {
        self.data.len()
    }

    pub fn solve(&self, b: &[f64]) -> Vec<f64> {
        let n = self.dim();
        assert_eq!(b.len(), n, "right-hand side has wrong length");
        let mut y: Vec<f64> = self.perm.iter().map(|&old| b[old]).collect();
        for i in 0..n {
            let fi = self.first[i];
            let row = &self.data[self.start[i]..self.start[i + 1]];
            let s: f64 = row[..i - fi].iter().zip(&y[fi..i]).map(|(a, b)| a * b).sum();
            y[i] = (y[i] - s) / row[i - fi];
        }
        for i in (0..n).rev() {
            let fi = self.first[i];
            let row = &self.data[self.start[i]..self.start[i + 1]];
            y[i] /= row[i - fi];
            let yi = y[i];
            for (k, a) in row[..i - fi].iter().enumerate() {
                y[fi + k] -= a * yi;
            }
        }
        let mut x = vec![0.0; n];
        for (new, &old) in self.perm.iter().enumerate() {
            x[old] = y[new];
        }
        x
    }
}

/// Banded LU factorization with partial pivoting of an RCM-reordered matrix,
/// stored column-major with leading dimension `2 kl + ku + 1`.
#[derive(Debug, Clone)]
pub struct BandedLu {
    perm: Vec<usize>,
    kl: usize,
    ku: usize,
    ab: Vec<f64>,
    ipiv: Vec<usize>,
}

impl BandedLu {
    pub fn factor(m: &SparseMatrix) -> Result<Self> {
        let n = m.nrows();
        if m.ncols() != n {
            return Err(Error::DimensionMismatch(format!(
                "LU of a non-square {}x{} matrix",
                n,
                m.ncols()
            )));
        }
        let perm = reverse_cuthill_mckee(m);
        let (kl, ku) = bandwidth(m, &perm);
        let mut inv = vec![0; n];
        for (new, &old) in perm.iter().enumerate() {
            inv[old] = new;
        }
        let kv = kl + ku;
        let ld = 2 * kl + ku + 1;
        let mut ab = vec![0.0; ld * n];
        let mut col_scale = vec![0.0f64; n];
        for old in 0..n {
            let r = inv[old];
            let (cols, vals) = m.row(old);
            for (&c_old, &v) in cols.iter().zip(vals) {
                let c = inv[c_old];
                ab[c * ld + kv + r - c] += v;
                col_scale[c] = col_scale[c].max(v.abs());
            }
        }

        let mut ipiv = vec![0; n];
        let mut ju = 0;
        for j in 0..n {
            let km = kl.min(n - 1 - j);
            let col = j * ld + kv;
            let mut jp = 0;
            let mut best = ab[col].abs();
            for t in 1..=km {
                if ab[col + t].abs() > best {
                    best = ab[col + t].abs();
                    jp = t;
                }
            }
            ipiv[j] = j + jp;
            if !(best > 64.0 * f64::EPSILON * col_scale[j]) || !best.is_finite() {
                return Err(Error::Singular { pivot: perm[j] });
            }
            ju = ju.max((j + ku + jp).min(n - 1));
            if jp != 0 {
                for c in j..=ju {
                    ab.swap(c * ld + kv + j - c, c * ld + kv + j + jp - c);
                }
            }
            let piv = ab[col];
            for t in 1..=km {
                ab[col + t] /= piv;
            }
            for c in j + 1..=ju {
                let a = ab[c * ld + kv + j - c];
                if a != 0.0 {
                    for t in 1..=km {
                        let l = ab[col + t];
                        ab[c * ld + kv + j + t - c] -= l * a;
                    }
                }
            }
        }
        Ok(BandedLu {
            perm,
            kl,
            ku,
            ab,
            ipiv,
        })
    }

    pub fn dim(&self) -> usize {
        self.perm.len()
    }

    pub fn bandwidths(&self) -> (usize, usize) {
        (self.kl, self.ku)
    }

    pub fn solve(&self, b: &[f64]) -> Vec<f64> {
        let n = self.dim();
        assert_eq!(b.len(), n, "right-hand side has wrong length");
        let (kl, kv) = (self.kl, self.kl + self.ku);
        let ld = 2 * self.kl + self.ku + 1;
        let mut y: Vec<f64> = self.perm.iter().map(|&old| b[old]).collect();
        for j in 0..n {
            y.swap(j, self.ipiv[j]);
            let km = kl.min(n - 1 - j);
            let yj = y[j];
            if yj != 0.0 {
                for t in 1..=km {
                    y[j + t] -= self.ab[j * ld + kv + t] * yj;
                }
            }
        }
        for j in (0..n).rev() {
            y[j] /= self.ab[j * ld + kv];
            let yj = y[j];
            if yj != 0.0 {
                for r in j.saturating_sub(kv)..j {
                    y[r] -= self.ab[j * ld + kv + r - j] * yj;
                }
            }
        }
        let mut x = vec![0.0; n];
        for (new, &old) in self.perm.iter().enumerate() {
            x[old] = y[new];
        }
        x
    }
}

/// Direct solve of a general square sparse system.
pub fn solve_general(m: &SparseMatrix, b: &[f64]) -> Result<Vec<f64>> {
    if b.len() != m.nrows() {
        return Err(Error::DimensionMismatch(format!(
            "right-hand side of length {} for {} rows",
            b.len(),
            m.nrows()
        )));
    }
    Ok(BandedLu::factor(m)?.solve(b))
}

#[cfg(test)]
mod tests {
    use super::*;
    use nalgebra::DVector;

    fn laplacian(n: usize) -> SparseMatrix {
        let mut trip = Vec::new();
        for i in 0..n {
            trip.push((i, i, 2.0));
            if i + 1 < n {
                trip.push((i, i + 1, -1.0));
                trip.push((i + 1, i, -1.0));
            }
        }
        SparseMatrix::from_triplets(n, n, &trip).unwrap()
    }

    #[test]
    fn cholesky_matches_dense_solve() {
        let m = laplacian(12);
        let b: Vec<f64> = (0..12).map(|i| (i as f64).sin()).collect();
        let x = SkylineCholesky::factor(&m).unwrap().solve(&b);
        let dense = m.to_dense().unwrap().lu().solve(&DVector::from_vec(b)).unwrap();
        for i in 0..12 {
            assert!((x[i] - dense[i]).abs() < 1e-12);
        }
    }

    #[test]
    fn cholesky_rejects_indefinite() {
        let m = SparseMatrix::from_triplets(2, 2, &[(0, 0, 1.0), (0, 1, 2.0), (1, 0, 2.0), (1, 1, 1.0)]).unwrap();
        assert!(matches!(
            SkylineCholesky::factor(&m),
            Err(Error::NotPositiveDefinite { .. })
        ));
    }

    #[test]
    fn lu_solves_permutation() {
        let m = SparseMatrix::from_triplets(3, 3, &[(0, 2, 1.0), (1, 0, 1.0), (2, 1, 1.0)]).unwrap();
        let x = solve_general(&m, &[1.0, 2.0, 3.0]).unwrap();
        assert_eq!(m.spmv(&x), vec![1.0, 2.0, 3.0]);
    }

    #[test]
    fn lu_reports_singularity() {
        let m = SparseMatrix::from_triplets(2, 2, &[(0, 0, 1.0), (0, 1, 1.0), (1, 0, 1.0), (1, 1, 1.0)]).unwrap();
        assert!(matches!(solve_general(&m, &[1.0, 1.0]), Err(Error::Singular { .. })));
    }

    #[test]
    fn lu_on_nonsymmetric_banded_system() {
        let n = 30;
        let mut trip = Vec::new();
        for i in 0..n {
            trip.push((i, i, 0.1 + (i % 3) as f64));
            if i + 2 < n {
                trip.push((i, i + 2, 3.0));
                trip.push((i + 2, i, -1.0));
            }
            if i + 1 < n {
                trip.push((i + 1, i, 2.5));
            }
        }
        let m = SparseMatrix::from_triplets(n, n, &trip).unwrap();
        let b: Vec<f64> = (0..n).map(|i| 1.0 + i as f64).collect();
        let x = solve_general(&m, &b).unwrap();
        let dense = m.to_dense().unwrap().lu().solve(&DVector::from_vec(b.clone())).unwrap();
        for i in 0..n {
            assert!((x[i] - dense[i]).abs() <= 1e-10 * (1.0 + dense[i].abs()));
        }
    }
}
