use nalgebra::DMatrix;
use serde::{Deserialize, Serialize};

use super::spectral::dense;
use crate::assembly::Scheme;
use crate::biot::DiscreteBiotSystem;
use crate::coupling::SolverConfig;
use crate::error::{Error, Result};

/// Largest block system accepted by the dense iteration-matrix check.
pub const SCHUR_DOF_LIMIT: usize = 1500;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SchurCheck {
    /// Spectral norms of the iteration matrix and of its square.
    pub s_norm: f64,
    pub s2_norm: f64,
    /// `||S^2|| / ||S||^2`.
    pub ratio: f64,
    /// Relative max-norm distance between `S_p - C = -D A^{-1} G` and its
    /// one-dimensional closed form (`None` outside 1D).
    pub schur_discrepancy: Option<f64>,
    pub dofs: usize,
}

fn free_indices(mask: &[bool]) -> Vec<usize> {
    mask.iter().enumerate().filter(|(_, &f)| f).map(|(i, _)| i).collect()
}

fn restrict(m: &DMatrix<f64>, rows: &[usize], cols: &[usize]) -> DMatrix<f64> {
    DMatrix::from_fn(rows.len(), cols.len(), |i, j| m[(rows[i], cols[j])])
}

fn spectral_norm(m: &DMatrix<f64>) -> f64 {
    m.clone().singular_values().iter().cloned().fold(0.0, f64::max)
}

fn rel_max(a: &DMatrix<f64>, b: &DMatrix<f64>) -> f64 {
    (a - b).amax() / b.amax().max(f64::MIN_POSITIVE)
}

/// Builds the error propagator `I - B A_stab` of the flow-then-mechanics
/// splitting on the free dofs and measures how close its square is to zero.
pub fn schur_two_iteration_check(system: &DiscreteBiotSystem, config: &SolverConfig) -> Result<SchurCheck> {
    let fu = free_indices(system.free_u());
    let fp = free_indices(system.free_p());
    let (nu, np) = (fu.len(), fp.len());
    if nu + np > SCHUR_DOF_LIMIT {
        return Err(Error::TooLargeForDense { rows: nu + np, cols: nu + np });
    }
    let a = restrict(&dense(&system.a)?, &fu, &fu);
    let g = restrict(&dense(&system.g)?, &fu, &fp);
    let d = restrict(&dense(&system.d)?, &fp, &fu);
    let c = restrict(&dense(&system.c)?, &fp, &fp);
    let a_p = restrict(&dense(&system.a_p)?, &fp, &fp);
    let m = restrict(&dense(&system.m)?, &fp, &fp);
    let ml = restrict(&dense(&system.m_l)?, &fp, &fp);

    let (g1, g2) = config.mode.gammas();
    let l = config.l;
    let p_flow = &a_p * system.tau + &m * system.params.inv_beta + &ml * (g1 * l) - &m * (g2 * l);

    let n = nu + np;
    let mut full = DMatrix::zeros(n, n);
    full.view_mut((0, 0), (nu, nu)).copy_from(&a);
    full.view_mut((0, nu), (nu, np)).copy_from(&g);
    full.view_mut((nu, 0), (np, nu)).copy_from(&d);
    full.view_mut((nu, nu), (np, np)).copy_from(&c);
    let mut left = DMatrix::zeros(n, n);
    left.view_mut((0, 0), (nu, nu)).copy_from(&a);
    left.view_mut((0, nu), (nu, np)).copy_from(&g);
    left.view_mut((nu, nu), (np, np)).copy_from(&p_flow);

    let lu = left.lu();
    let b_a = lu.solve(&full).ok_or(Error::Singular { pivot: 0 })?;
    let s = DMatrix::identity(n, n) - b_a;
    let s_norm = spectral_norm(&s);
    let s2_norm = spectral_norm(&(&s * &s));
    let ratio = if s_norm > 0.0 { s2_norm / (s_norm * s_norm) } else { 0.0 };

    let schur_discrepancy = if system.dim() == 1 {
        let ainv_g = a.clone().lu().solve(&g).ok_or(Error::Singular { pivot: 0 })?;
        let measured = -(&d * ainv_g);
        let p = &system.params;
        let coef = p.alpha * p.alpha / p.constrained_modulus(1);
        let predicted = match system.scheme {
            Scheme::P1P1 => (&m * 1.5 - &ml * 0.5) * coef,
            Scheme::Mini => &m * coef,
        };
        Some(rel_max(&measured, &predicted))
    } else {
        None
    };
    Ok(SchurCheck {
        s_norm,
        s2_norm,
        ratio,
        schur_discrepancy,
        dofs: n,
    })
}
