use nalgebra::{DMatrix, SymmetricEigen};
use serde::{Deserialize, Serialize};

use crate::assembly::{self, FeSpace};
use crate::error::{Error, Result};
use crate::linalg::SparseMatrix;
use crate::mesh::Mesh;

/// Largest pressure space accepted by the dense eigensolve.
pub const SPECTRAL_DOF_LIMIT: usize = 3000;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SpectralReport {
    /// Extreme generalized eigenvalues of `(h^2 L_p, Z)` off the constants.
    pub c1: f64,
    pub c2: f64,
    /// Smallest eigenvalue of `Z` itself (including the constant mode).
    pub z_min_eigenvalue: f64,
    pub shape_constant_min: f64,
    pub shape_constant_max: f64,
    pub shape_constant_mean: f64,
    pub dofs: usize,
}

/// Orthonormal basis of the complement of the constant vector, as the last
/// `n - 1` columns of the Householder reflector mapping `e_1` to `1/sqrt(n)`.
pub(crate) fn constant_complement(n: usize) -> DMatrix<f64> {
    let s = 1.0 / (n as f64).sqrt();
    let mut v = nalgebra::DVector::from_element(n, s);
    v[0] -= 1.0;
    let vv = v.dot(&v);
    let mut q = DMatrix::identity(n, n);
    if vv > 0.0 {
        q -= (&v * v.transpose()) * (2.0 / vv);
    }
    q.columns(1, n - 1).into_owned()
}

pub(crate) fn dense(m: &SparseMatrix) -> Result<DMatrix<f64>> {
    m.to_dense()
}

/// Extreme eigenvalues of the symmetric pencil `(a, b)` with `b` SPD.
pub(crate) fn pencil_extremes(a: &DMatrix<f64>, b: &DMatrix<f64>) -> Result<(f64, f64)> {
    let chol = b
        .clone()
        .cholesky()
        .ok_or(Error::NotPositiveDefinite { pivot: 0, value: f64::NAN })?;
    let l = chol.l();
    let linv = l
        .clone()
        .try_inverse()
        .ok_or(Error::Singular { pivot: 0 })?;
    let mut s = &linv * a * linv.transpose();
    s = (&s + s.transpose()) * 0.5;
    let eig = SymmetricEigen::new(s).eigenvalues;
    let lo = eig.iter().cloned().fold(f64::INFINITY, f64::min);
    let hi = eig.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
    Ok((lo, hi))
}

/// Equivalence constants between the scaled stiffness `h^2 L_p` (with the
/// element diameter as local `h`) and the lumping defect `Z = M_l - M`.
pub fn spectral_equivalence(mesh: &Mesh, space: &FeSpace) -> Result<SpectralReport> {
    let n = space.ndofs();
    if n > SPECTRAL_DOF_LIMIT {
        return Err(Error::TooLargeForDense { rows: n, cols: n });
    }
    if n < 2 {
        return Err(Error::InvalidMesh("need at least two pressure dofs".into()));
    }
    let lp = dense(&assembly::assemble_scaled_stiffness(space, mesh)?)?;
    let m = assembly::assemble_mass(space, mesh)?;
    let ml = assembly::lump_mass(space, mesh)?;
    let z = dense(&ml.add(1.0, &m, -1.0)?)?;

    let z_eigs = SymmetricEigen::new((&z + z.transpose()) * 0.5).eigenvalues;
    let z_min = z_eigs.iter().cloned().fold(f64::INFINITY, f64::min);

    let q = constant_complement(n);
    let lp_hat = q.transpose() * &lp * &q;
    let z_hat = q.transpose() * &z * &q;
    let (c1, c2) = pencil_extremes(&lp_hat, &z_hat)?;

    let mut cmin = f64::INFINITY;
    let mut cmax = 0.0f64;
    let mut csum = 0.0;
    for e in 0..mesh.num_elements() {
        let c = mesh.element_geometry(e)?.shape_constant;
        cmin = cmin.min(c);
        cmax = cmax.max(c);
        csum += c;
    }
    Ok(SpectralReport {
        c1,
        c2,
        z_min_eigenvalue: z_min,
        shape_constant_min: cmin,
        shape_constant_max: cmax,
        shape_constant_mean: csum / mesh.num_elements() as f64,
        dofs: n,
    })
}
