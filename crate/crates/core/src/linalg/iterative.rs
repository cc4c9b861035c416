use super::sparse::{dot, norm2};
use super::SparseMatrix;
use crate::error::{Error, Result};

/// Jacobi-preconditioned conjugate gradients.
///
/// Stops once `||m x - b|| <= tol ||b||`. A zero right-hand side returns the
/// zero vector without iterating.
pub fn solve_spd(m: &SparseMatrix, b: &[f64], tol: f64, max_it: usize) -> Result<Vec<f64>> {
    let n = m.nrows();
    if m.ncols() != n || b.len() != n {
        return Err(Error::DimensionMismatch(format!(
            "CG on a {}x{} matrix with a right-hand side of length {}",
            n,
            m.ncols(),
            b.len()
        )));
    }
    if !(tol > 0.0) {
        return Err(Error::InvalidParameter(format!("CG tolerance {tol} must be positive")));
    }
    let mut x = vec![0.0; n];
    let bnorm = norm2(b);
    if bnorm == 0.0 {
        return Ok(x);
    }
    let inv_diag: Vec<f64> = m
        .diagonal()
        .iter()
        .map(|&d| if d > 0.0 { 1.0 / d } else { 1.0 })
        .collect();

    let mut r = b.to_vec();
    let mut z: Vec<f64> = r.iter().zip(&inv_diag).map(|(a, d)| a * d).collect();
    let mut p = z.clone();
    let mut rz = dot(&r, &z);
    let mut q = vec![0.0; n];
    let mut res = 1.0;
    for it in 0..max_it {
        q.iter_mut().for_each(|v| *v = 0.0);
        m.spmv_add(1.0, &p, &mut q);
        let pq = dot(&p, &q);
        if !(pq > 0.0) {
            return Err(Error::NotConverged {
                iterations: it,
                residual: res,
            });
        }
        let a = rz / pq;
        for i in 0..n {
            x[i] += a * p[i];
            r[i] -= a * q[i];
        }
        res = norm2(&r) / bnorm;
        if res <= tol {
            return Ok(x);
        }
        for i in 0..n {
            z[i] = r[i] * inv_diag[i];
        }
        let rz_new = dot(&r, &z);
        let beta = rz_new / rz;
        rz = rz_new;
        for i in 0..n {
            p[i] = z[i] + beta * p[i];
        }
    }
    Err(Error::NotConverged {
        iterations: max_it,
        residual: res,
    })
}
