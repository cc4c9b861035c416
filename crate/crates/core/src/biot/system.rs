use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use super::params::{stabilization_coefficient, MaterialParams, Regime};
use crate::assembly::{
    self, BoundaryConditions, FeSpace, Scheme, SourceTerms, SpaceKind,
};
use crate::error::{Error, Result};
use crate::linalg::{norm2, BlockOperator, SparseMatrix};
use crate::mesh::Mesh;

/// Displacement and pressure coefficient vectors at time `t`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SolutionState {
    pub u: Vec<f64>,
    pub p: Vec<f64>,
    pub t: f64,
}

impl SolutionState {
    pub fn zeros(nu: usize, np: usize) -> Self {
        SolutionState {
            u: vec![0.0; nu],
            p: vec![0.0; np],
            t: 0.0,
        }
    }
}

/// A Biot problem on a mesh with backward Euler over `steps` uniform steps.
#[derive(Debug, Clone)]
pub struct ProblemDefinition {
    pub mesh: Mesh,
    pub params: MaterialParams,
    pub bcs: BoundaryConditions,
    pub sources: SourceTerms,
    pub final_time: f64,
    pub steps: usize,
    /// Initial state; zero fields when absent.
    pub initial: Option<SolutionState>,
}

impl ProblemDefinition {
    pub fn new(mesh: Mesh, params: MaterialParams, bcs: BoundaryConditions, final_time: f64, steps: usize) -> Self {
        ProblemDefinition {
            mesh,
            params,
            bcs,
            sources: SourceTerms::default(),
            final_time,
            steps,
            initial: None,
        }
    }

    pub fn dim(&self) -> usize {
        self.mesh.dim()
    }

    pub fn tau(&self) -> f64 {
        self.final_time / self.steps as f64
    }

    pub fn validate(&self) -> Result<()> {
        self.params.validate()?;
        if self.steps == 0 {
            return Err(Error::InvalidParameter("time-step count must be at least 1".into()));
        }
        if !(self.final_time > 0.0) || !self.final_time.is_finite() {
            return Err(Error::InvalidParameter(format!(
                "final time {} must be positive",
                self.final_time
            )));
        }
        Ok(())
    }

    /// Stabilization parameter in the small-storage regime.
    pub fn default_stabilization(&self, scheme: Scheme) -> Result<f64> {
        stabilization_coefficient(scheme, &self.params, self.dim(), Regime::SmallStorage)
    }
}

/// Assembled blocks of the stabilized backward Euler step
/// `[[A, G], [D, C]] (u, p) = (f, tau g + D u_prev + (M/beta + L Z) p_prev)`.
///
/// The plain fields hold the operators before essential conditions are
/// imposed. The `*_c` accessors give the constrained versions, whose fixed
/// rows and columns are removed and replaced by a unit diagonal.
#[derive(Debug, Clone)]
pub struct DiscreteBiotSystem {
    pub scheme: Scheme,
    pub params: MaterialParams,
    pub tau: f64,
    /// Stabilization parameter.
    pub l: f64,
    pub space_u: FeSpace,
    pub space_p: FeSpace,
    pub a: SparseMatrix,
    pub g: SparseMatrix,
    pub d: SparseMatrix,
    pub a_p: SparseMatrix,
    pub m: SparseMatrix,
    pub m_l: SparseMatrix,
    /// Lumping defect `M_l - M`.
    pub z: SparseMatrix,
    /// `tau A_p + M / beta + L Z`.
    pub c: SparseMatrix,
    free_u: Vec<bool>,
    free_p: Vec<bool>,
    a_c: SparseMatrix,
    g_c: SparseMatrix,
    d_c: SparseMatrix,
    c_c: SparseMatrix,
}

/// Builds all blocks for `scheme` with time step `tau`. `l` overrides the
/// small-storage stabilization parameter; `Some(0.0)` gives the plain scheme.
pub fn build_stabilized_system(problem: &ProblemDefinition, scheme: Scheme, tau: f64, l: Option<f64>) -> Result<DiscreteBiotSystem> {
    problem.validate()?;
    if !(tau > 0.0) {
        return Err(Error::InvalidParameter(format!("time step {tau} must be positive")));
    }
    let l = match l {
        Some(l) if l >= 0.0 && l.is_finite() => l,
        Some(l) => return Err(Error::InvalidParameter(format!("stabilization parameter {l} must be nonnegative"))),
        None => problem.default_stabilization(scheme)?,
    };
    let mesh = &problem.mesh;
    let p = &problem.params;
    let mut space_u = FeSpace::new(scheme.displacement_kind(), mesh);
    let mut space_p = FeSpace::new(SpaceKind::P1Scalar, mesh);
    problem.bcs.constrain_spaces(mesh, &mut space_u, &mut space_p)?;

    let a = assembly::assemble_elasticity(&space_u, mesh, p.mu, p.lambda)?;
    let g = assembly::assemble_coupling(&space_u, &space_p, mesh, p.alpha)?;
    let d = g.transpose().scale(-1.0);
    let a_p = assembly::assemble_pressure_stiffness(&space_p, mesh, p.conductivity)?;
    let m = assembly::assemble_mass(&space_p, mesh)?;
    let m_l = assembly::lump_mass(&space_p, mesh)?;
    let z = m_l.add(1.0, &m, -1.0)?;
    let c = SparseMatrix::linear_combination(&[(tau, &a_p), (p.inv_beta, &m), (l, &z)])?;

    let free_u = space_u.free_mask();
    let free_p = space_p.free_mask();
    let a_c = assembly::dirichlet_matrix(&a, space_u.constraints());
    let c_c = assembly::dirichlet_matrix(&c, space_p.constraints());
    let g_c = g.mask(&free_u, &free_p);
    let d_c = d.mask(&free_p, &free_u);
    Ok(DiscreteBiotSystem {
        scheme,
        params: *p,
        tau,
        l,
        space_u,
        space_p,
        a,
        g,
        d,
        a_p,
        m,
        m_l,
        z,
        c,
        free_u,
        free_p,
        a_c,
        g_c,
        d_c,
        c_c,
    })
}

impl DiscreteBiotSystem {
    pub fn dim(&self) -> usize {
        self.space_u.dim()
    }

    pub fn nu(&self) -> usize {
        self.space_u.ndofs()
    }

    pub fn np(&self) -> usize {
        self.space_p.ndofs()
    }

    pub fn free_u(&self) -> &[bool] {
        &self.free_u
    }

    pub fn free_p(&self) -> &[bool] {
        &self.free_p
    }

    pub fn fixed_u(&self) -> &BTreeMap<usize, f64> {
        self.space_u.constraints()
    }

    pub fn fixed_p(&self) -> &BTreeMap<usize, f64> {
        self.space_p.constraints()
    }

    pub fn a_c(&self) -> &SparseMatrix {
        &self.a_c
    }

    pub fn g_c(&self) -> &SparseMatrix {
        &self.g_c
    }

    pub fn d_c(&self) -> &SparseMatrix {
        &self.d_c
    }

    pub fn c_c(&self) -> &SparseMatrix {
        &self.c_c
    }

    /// The constrained stabilized operator.
    pub fn operator(&self) -> BlockOperator<'_> {
        BlockOperator::new(&self.a_c, &self.g_c, &self.d_c, &self.c_c).expect("assembled blocks conform")
    }

    /// The constrained operator as one sparse matrix.
    pub fn monolithic_matrix(&self) -> SparseMatrix {
        self.operator().to_monolithic()
    }

    /// Operator applied to the previous pressure on the flow row,
    /// `M / beta + L Z`.
    pub fn memory_operator(&self) -> Result<SparseMatrix> {
        SparseMatrix::linear_combination(&[(self.params.inv_beta, &self.m), (self.l, &self.z)])
    }

    /// Right-hand side of the flow row, `tau g + D u_prev + (M/beta + L Z) p_prev`.
    pub fn flow_rhs(&self, g: &[f64], prev: &SolutionState) -> Vec<f64> {
        let mut r: Vec<f64> = g.iter().map(|v| self.tau * v).collect();
        self.d.spmv_add(1.0, &prev.u, &mut r);
        self.m.spmv_add(self.params.inv_beta, &prev.p, &mut r);
        self.z.spmv_add(self.l, &prev.p, &mut r);
        r
    }

    /// Euclidean norms of the momentum and flow residuals restricted to free
    /// rows, for the unconstrained operator applied to `(u, p)`.
    pub fn residual_norms(&self, u: &[f64], p: &[f64], f: &[f64], flow_rhs: &[f64]) -> (f64, f64) {
        let mut ru = f.to_vec();
        self.a.spmv_add(-1.0, u, &mut ru);
        self.g.spmv_add(-1.0, p, &mut ru);
        let mut rp = flow_rhs.to_vec();
        self.d.spmv_add(-1.0, u, &mut rp);
        self.c.spmv_add(-1.0, p, &mut rp);
        let nu = ru.iter().zip(&self.free_u).filter(|(_, &f)| f).map(|(r, _)| r * r).sum::<f64>();
        let np = rp.iter().zip(&self.free_p).filter(|(_, &f)| f).map(|(r, _)| r * r).sum::<f64>();
        (nu.sqrt(), np.sqrt())
    }

    pub fn residual_norm(&self, u: &[f64], p: &[f64], f: &[f64], flow_rhs: &[f64]) -> f64 {
        let (a, b) = self.residual_norms(u, p, f, flow_rhs);
        (a * a + b * b).sqrt()
    }

    /// State holding the prescribed boundary values and zeros elsewhere.
    pub fn boundary_state(&self, t: f64) -> SolutionState {
        SolutionState {
            u: self.space_u.fixed_values(),
            p: self.space_p.fixed_values(),
            t,
        }
    }

    /// Checks that a state matches the essential conditions exactly.
    pub fn satisfies_constraints(&self, state: &SolutionState) -> bool {
        self.fixed_u().iter().all(|(&d, &v)| state.u[d] == v)
            && self.fixed_p().iter().all(|(&d, &v)| state.p[d] == v)
    }

    /// Largest relative entrywise deviation of `D` from `-G^T`.
    pub fn coupling_antisymmetry_defect(&self) -> f64 {
        let gt = self.g.transpose();
        let diff = self.d.add(1.0, &gt, 1.0).expect("shapes agree");
        diff.max_abs() / self.g.max_abs().max(f64::MIN_POSITIVE)
    }
}

/// Relative difference `||a - b|| / max(||b||, tiny)`.
pub fn relative_difference(a: &[f64], b: &[f64]) -> f64 {
    let diff: Vec<f64> = a.iter().zip(b).map(|(x, y)| x - y).collect();
    norm2(&diff) / norm2(b).max(f64::MIN_POSITIVE)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::benchmarks::{footing3d_problem, terzaghi_problem, FootingSpec, TerzaghiSpec};

    #[test]
    fn blocks_have_the_expected_structure() {
        let problem = footing3d_problem(&FootingSpec {
            cells: 4,
            ..Default::default()
        })
        .unwrap();
        for scheme in [Scheme::P1P1, Scheme::Mini] {
            let s = build_stabilized_system(&problem, scheme, 1e-2, None).unwrap();
            assert_eq!(s.coupling_antisymmetry_defect(), 0.0);
            assert!(s.a.is_symmetric(1e-12) && s.c.is_symmetric(1e-12));
            // Lumping preserves row sums, so Z annihilates constants.
            let ones = vec![1.0; s.np()];
            assert!(s.z.spmv(&ones).iter().all(|v| v.abs() < 1e-14));
            assert!(s.l > 0.0);
        }
    }

    #[test]
    fn invalid_stabilization_or_step_is_rejected() {
        let problem = terzaghi_problem(&TerzaghiSpec {
            cells: 4,
            ..Default::default()
        })
        .unwrap();
        assert!(build_stabilized_system(&problem, Scheme::P1P1, 0.1, Some(-1.0)).is_err());
        assert!(build_stabilized_system(&problem, Scheme::P1P1, 0.0, None).is_err());
        let plain = build_stabilized_system(&problem, Scheme::P1P1, 0.1, Some(0.0)).unwrap();
        assert_eq!(plain.l, 0.0);
    }

    #[test]
    fn boundary_state_satisfies_constraints() {
        let problem = terzaghi_problem(&TerzaghiSpec {
            cells: 4,
            ..Default::default()
        })
        .unwrap();
        let s = build_stabilized_system(&problem, Scheme::Mini, 0.1, None).unwrap();
        assert!(s.satisfies_constraints(&s.boundary_state(0.1)));
        assert_eq!(relative_difference(&[1.0, 2.0], &[1.0, 2.0]), 0.0);
    }
}
