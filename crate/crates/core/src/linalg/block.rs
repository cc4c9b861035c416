use super::SparseMatrix;
use crate::error::{Error, Result};

/// The 2x2 block operator `[[A, G], [D, C]]` acting on `(u, p)`.
#[derive(Debug, Clone, Copy)]
pub struct BlockOperator<'a> {
    pub a: &'a SparseMatrix,
    pub g: &'a SparseMatrix,
    pub d: &'a SparseMatrix,
    pub c: &'a SparseMatrix,
}

impl<'a> BlockOperator<'a> {
    pub fn new(
        a: &'a SparseMatrix,
        g: &'a SparseMatrix,
        d: &'a SparseMatrix,
        c: &'a SparseMatrix,
    ) -> Result<Self> {
        let (nu, np) = (a.nrows(), c.nrows());
        let ok = a.ncols() == nu
            && c.ncols() == np
            && g.shape() == (nu, np)
            && d.shape() == (np, nu);
        if !ok {
            return Err(Error::DimensionMismatch(format!(
                "blocks A {:?}, G {:?}, D {:?}, C {:?} do not conform",
                a.shape(),
                g.shape(),
                d.shape(),
                c.shape()
            )));
        }
        Ok(BlockOperator { a, g, d, c })
    }

    pub fn displacement_dofs(&self) -> usize {
        self.a.nrows()
    }

    pub fn pressure_dofs(&self) -> usize {
        self.c.nrows()
    }

    pub fn apply(&self, u: &[f64], p: &[f64]) -> (Vec<f64>, Vec<f64>) {
        let mut ru = self.a.spmv(u);
        self.g.spmv_add(1.0, p, &mut ru);
        let mut rp = self.d.spmv(u);
        self.c.spmv_add(1.0, p, &mut rp);
        (ru, rp)
    }

    /// Applies the operator to the stacked vector `[u; p]`.
    pub fn apply_stacked(&self, x: &[f64]) -> Vec<f64> {
        let nu = self.displacement_dofs();
        let (ru, rp) = self.apply(&x[..nu], &x[nu..]);
        ru.into_iter().chain(rp).collect()
    }

    pub fn to_monolithic(&self) -> SparseMatrix {
        let nu = self.displacement_dofs();
        let n = nu + self.pressure_dofs();
        let mut trip = Vec::with_capacity(self.a.nnz() + self.g.nnz() + self.d.nnz() + self.c.nnz());
        let mut push = |m: &SparseMatrix, r0: usize, c0: usize| {
            for i in 0..m.nrows() {
                let (cols, vals) = m.row(i);
                for (&j, &v) in cols.iter().zip(vals) {
                    trip.push((r0 + i, c0 + j, v));
                }
            }
        };
        push(self.a, 0, 0);
        push(self.g, 0, nu);
        push(self.d, nu, 0);
        push(self.c, nu, nu);
        SparseMatrix::from_triplets(n, n, &trip).expect("block indices in range")
    }
}
