//! Sparse storage, block operators and linear solvers.

mod block;
mod direct;
mod iterative;
mod ordering;
mod sparse;

use serde::{Deserialize, Serialize};

pub use block::BlockOperator;
pub use direct::{solve_general, BandedLu, SkylineCholesky};
pub use iterative::solve_spd;
pub use ordering::{bandwidth, reverse_cuthill_mckee};
pub use sparse::{assemble_from_triplets, dot, norm2, to_dense, SparseMatrix, DENSE_GUARD};

use crate::error::Result;

/// Inner solver used for the SPD blocks of the coupling iteration.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case")]
#[derive(Default)]
pub enum InnerSolver {
    /// Envelope Cholesky, factored once per coupled solve.
    #[default]
    Direct,
    /// Jacobi-preconditioned CG with a relative residual tolerance.
    Cg { tol: f64, max_it: usize },
}


impl InnerSolver {
    pub fn cg() -> Self {
        InnerSolver::Cg {
            tol: 1e-12,
            max_it: 20_000,
        }
    }
}

/// A prepared solver for one SPD matrix.
#[derive(Debug, Clone)]
pub enum SpdSolver {
    Cholesky(SkylineCholesky),
    Cg {
        matrix: SparseMatrix,
        tol: f64,
        max_it: usize,
    },
}

impl SpdSolver {
    pub fn new(m: &SparseMatrix, kind: InnerSolver) -> Result<Self> {
        Ok(match kind {
            InnerSolver::Direct => SpdSolver::Cholesky(SkylineCholesky::factor(m)?),
            InnerSolver::Cg { tol, max_it } => SpdSolver::Cg {
                matrix: m.clone(),
                tol,
                max_it,
            },
        })
    }

    pub fn solve(&self, b: &[f64]) -> Result<Vec<f64>> {
        match self {
            SpdSolver::Cholesky(f) => Ok(f.solve(b)),
            SpdSolver::Cg { matrix, tol, max_it } => solve_spd(matrix, b, *tol, *max_it),
        }
    }
}
