use std::collections::BTreeMap;

use nalgebra::{DMatrix, DVector};

use super::system::{DiscreteBiotSystem, SolutionState};
use crate::assembly;
use crate::error::{Error, Result};
use crate::linalg::{BandedLu, BlockOperator, SparseMatrix};

/// Element-local elimination of the MINI bubble unknowns. Valid because the
/// elasticity form does not couple bubbles to vertex functions.
#[derive(Debug, Clone)]
struct BubbleCondensation {
    vertex_dofs: usize,
    dim: usize,
    /// Inverse bubble block per element, row-major `d x d`.
    inv_blocks: Vec<DMatrix<f64>>,
    /// Bubble rows of `G`, per element: pressure columns and `d x ncols` values.
    coupling: Vec<(Vec<usize>, DMatrix<f64>)>,
}

impl BubbleCondensation {
    fn new(system: &DiscreteBiotSystem) -> Result<Self> {
        let dim = system.dim();
        let vertex_dofs = system.space_u.num_vertex_dofs();
        let ne = (system.nu() - vertex_dofs) / dim;
        let mut inv_blocks = Vec::with_capacity(ne);
        let mut coupling = Vec::with_capacity(ne);
        for e in 0..ne {
            let rows: Vec<usize> = (0..dim).map(|a| vertex_dofs + dim * e + a).collect();
            let block = DMatrix::from_fn(dim, dim, |i, j| system.a.get(rows[i], rows[j]));
            let inv = block
                .try_inverse()
                .ok_or(Error::Singular { pivot: rows[0] })?;
            inv_blocks.push(inv);
            let mut cols: Vec<usize> = rows.iter().flat_map(|&r| system.g.row(r).0.iter().copied()).collect();
            cols.sort_unstable();
            cols.dedup();
            let vals = DMatrix::from_fn(dim, cols.len(), |i, j| system.g.get(rows[i], cols[j]));
            coupling.push((cols, vals));
        }
        Ok(BubbleCondensation {
            vertex_dofs,
            dim,
            inv_blocks,
            coupling,
        })
    }

    /// `sum_e G_e^T B_e^{-1} G_e`, the pressure-block correction.
    fn pressure_correction(&self, np: usize) -> Result<SparseMatrix> {
        let mut trip = Vec::new();
        for (inv, (cols, vals)) in self.inv_blocks.iter().zip(&self.coupling) {
            let s = vals.transpose() * inv * vals;
            for (i, &ci) in cols.iter().enumerate() {
                for (j, &cj) in cols.iter().enumerate() {
                    trip.push((ci, cj, s[(i, j)]));
                }
            }
        }
        SparseMatrix::from_triplets(np, np, &trip)
    }

    fn bubble_load(&self, f: &[f64], e: usize) -> DVector<f64> {
        let off = self.vertex_dofs + self.dim * e;
        DVector::from_column_slice(&f[off..off + self.dim])
    }

    /// Adds `G_b^T B^{-1} f_b` to the flow right-hand side.
    fn condense_rhs(&self, f: &[f64], flow: &mut [f64]) {
        for (e, (inv, (cols, vals))) in self.inv_blocks.iter().zip(&self.coupling).enumerate() {
            let w = vals.transpose() * (inv * self.bubble_load(f, e));
            for (k, &c) in cols.iter().enumerate() {
                flow[c] += w[k];
            }
        }
    }

    /// Recovers `u_b = B^{-1} (f_b - G_b p)`.
    fn recover(&self, f: &[f64], p: &[f64], u: &mut [f64]) {
        for (e, (inv, (cols, vals))) in self.inv_blocks.iter().zip(&self.coupling).enumerate() {
            let pe = DVector::from_iterator(cols.len(), cols.iter().map(|&c| p[c]));
            let ub = inv * (self.bubble_load(f, e) - vals * pe);
            let off = self.vertex_dofs + self.dim * e;
            u[off..off + self.dim].copy_from_slice(ub.as_slice());
        }
    }
}

/// Direct solver for the full stabilized step, factored once.
#[derive(Debug, Clone)]
pub struct MonolithicSolver<'a> {
    system: &'a DiscreteBiotSystem,
    full: SparseMatrix,
    fixed: BTreeMap<usize, f64>,
    lu: BandedLu,
    condensation: Option<BubbleCondensation>,
}

impl<'a> MonolithicSolver<'a> {
    /// Factors the system with explicit bubble unknowns.
    pub fn new(system: &'a DiscreteBiotSystem) -> Result<Self> {
        Self::build(system, false)
    }

    /// Factors the system after eliminating the MINI bubbles element by
    /// element. Identical to [`MonolithicSolver::new`] for P1-P1.
    pub fn with_condensation(system: &'a DiscreteBiotSystem) -> Result<Self> {
        Self::build(system, system.space_u.has_bubbles())
    }

    fn build(system: &'a DiscreteBiotSystem, condense: bool) -> Result<Self> {
        let (full, condensation, nu) = if condense {
            let cond = BubbleCondensation::new(system)?;
            let nl = cond.vertex_dofs;
            let vertex: Vec<usize> = (0..nl).collect();
            let pressure: Vec<usize> = (0..system.np()).collect();
            let a = system.a.submatrix(&vertex, &vertex);
            let g = system.g.submatrix(&vertex, &pressure);
            let d = system.d.submatrix(&pressure, &vertex);
            let c = system.c.add(1.0, &cond.pressure_correction(system.np())?, 1.0)?;
            let full = BlockOperator::new(&a, &g, &d, &c)?.to_monolithic();
            (full, Some(cond), nl)
        } else {
            let full = BlockOperator::new(&system.a, &system.g, &system.d, &system.c)?.to_monolithic();
            (full, None, system.nu())
        };
        let mut fixed = system.fixed_u().clone();
        fixed.extend(system.fixed_p().iter().map(|(&d, &v)| (nu + d, v)));
        let constrained = assembly::dirichlet_matrix(&full, &fixed);
        let lu = BandedLu::factor(&constrained)?;
        Ok(MonolithicSolver {
            system,
            full,
            fixed,
            lu,
            condensation,
        })
    }

    pub fn system(&self) -> &DiscreteBiotSystem {
        self.system
    }

    /// One backward Euler step from `prev` with loads `f`, `g` at the new time.
    pub fn step(&self, prev: &SolutionState, f: &[f64], g: &[f64], t: f64) -> Result<SolutionState> {
        let sys = self.system;
        if f.len() != sys.nu() || g.len() != sys.np() || prev.u.len() != sys.nu() || prev.p.len() != sys.np() {
            return Err(Error::DimensionMismatch("monolithic step inputs do not match the system".into()));
        }
        let mut flow = sys.flow_rhs(g, prev);
        let nu_red = match &self.condensation {
            Some(c) => {
                c.condense_rhs(f, &mut flow);
                c.vertex_dofs
            }
            None => sys.nu(),
        };
        let rhs: Vec<f64> = f[..nu_red].iter().copied().chain(flow).collect();
        let rhs = assembly::dirichlet_rhs(&self.full, &rhs, &self.fixed);
        let x = self.lu.solve(&rhs);
        let p = x[nu_red..].to_vec();
        let mut u = vec![0.0; sys.nu()];
        u[..nu_red].copy_from_slice(&x[..nu_red]);
        if let Some(c) = &self.condensation {
            c.recover(f, &p, &mut u);
        }
        Ok(SolutionState { u, p, t })
    }
}

/// Solves one stabilized backward Euler step directly.
pub fn monolithic_step(system: &DiscreteBiotSystem, prev: &SolutionState, f: &[f64], g: &[f64], t: f64) -> Result<SolutionState> {
    MonolithicSolver::new(system)?.step(prev, f, g, t)
}
