//! Finite-element matrices, load vectors and essential boundary conditions.

pub mod local;
mod rhs;
mod space;

use std::collections::BTreeMap;

pub use rhs::{
    assemble_rhs, BoundaryConditions, DisplacementBc, Patch, PointSource, PressureBc,
    ScalarField, SourceTerms, Traction, VectorField,
};
pub use space::{FeSpace, Scheme, SpaceKind};

use crate::error::{Error, Result};
use crate::linalg::SparseMatrix;
use crate::mesh::{ElementGeometry, Mesh};

fn check_space(space: &FeSpace, mesh: &Mesh, expect_scalar: bool) -> Result<()> {
    let matches = space.dim() == mesh.dim()
        && space.ndofs()
            == FeSpace::new(space.kind(), mesh).ndofs()
        && (space.kind() == SpaceKind::P1Scalar) == expect_scalar;
    if matches {
        Ok(())
    } else {
        Err(Error::DimensionMismatch(format!(
            "{:?} space with {} dofs does not belong to this {}D mesh",
            space.kind(),
            space.ndofs(),
            mesh.dim()
        )))
    }
}

fn for_each_element(
    mesh: &Mesh,
    mut f: impl FnMut(usize, &[usize], &ElementGeometry),
) -> Result<()> {
    for e in 0..mesh.num_elements() {
        let geo = mesh.element_geometry(e)?;
        f(e, mesh.element(e), &geo);
    }
    Ok(())
}

/// Elasticity matrix of `2 mu eps(u):eps(v) + lambda div u div v`.
pub fn assemble_elasticity(space: &FeSpace, mesh: &Mesh, mu: f64, lambda: f64) -> Result<SparseMatrix> {
    check_space(space, mesh, false)?;
    if !(mu > 0.0) || !(lambda >= 0.0) {
        return Err(Error::InvalidParameter(format!(
            "elasticity needs mu > 0 and lambda >= 0 (got {mu}, {lambda})"
        )));
    }
    let d = mesh.dim();
    let bubble = space.has_bubbles();
    let mut trip = Vec::new();
    for_each_element(mesh, |e, verts, geo| {
        let dofs = space.element_dofs(e, verts);
        let k = local::elasticity(geo, d, mu, lambda, bubble);
        let vertex_part = (d + 1) * d;
        for (r, &gr) in dofs.iter().enumerate() {
            for (c, &gc) in dofs.iter().enumerate() {
                // Vertex-bubble entries are identically zero; keep them out of the pattern.
                if (r < vertex_part) == (c < vertex_part) {
                    trip.push((gr, gc, k[r][c]));
                }
            }
        }
    })?;
    SparseMatrix::from_triplets(space.ndofs(), space.ndofs(), &trip)
}

/// Coupling matrix `G` of `-alpha (p, div v)`; the flow block uses `D = -G^T`.
pub fn assemble_coupling(space_v: &FeSpace, space_q: &FeSpace, mesh: &Mesh, alpha: f64) -> Result<SparseMatrix> {
    check_space(space_v, mesh, false)?;
    check_space(space_q, mesh, true)?;
    let d = mesh.dim();
    let bubble = space_v.has_bubbles();
    let mut trip = Vec::new();
    for_each_element(mesh, |e, verts, geo| {
        let rows = space_v.element_dofs(e, verts);
        let g = local::coupling(geo, d, alpha, bubble);
        for (r, &gr) in rows.iter().enumerate() {
            for (c, &v) in verts.iter().enumerate() {
                trip.push((gr, v, g[r][c]));
            }
        }
    })?;
    SparseMatrix::from_triplets(space_v.ndofs(), space_q.ndofs(), &trip)
}

fn assemble_scalar(
    space: &FeSpace,
    mesh: &Mesh,
    local: impl Fn(&ElementGeometry) -> Vec<Vec<f64>>,
) -> Result<SparseMatrix> {
    check_space(space, mesh, true)?;
    let mut trip = Vec::new();
    for_each_element(mesh, |_, verts, geo| {
        let k = local(geo);
        for (r, &gr) in verts.iter().enumerate() {
            for (c, &gc) in verts.iter().enumerate() {
                trip.push((gr, gc, k[r][c]));
            }
        }
    })?;
    SparseMatrix::from_triplets(space.ndofs(), space.ndofs(), &trip)
}

/// Pressure stiffness `int K grad p . grad q`.
pub fn assemble_pressure_stiffness(space: &FeSpace, mesh: &Mesh, conductivity: f64) -> Result<SparseMatrix> {
    if !(conductivity > 0.0) {
        return Err(Error::InvalidParameter(format!(
            "conductivity {conductivity} must be positive"
        )));
    }
    let d = mesh.dim();
    assemble_scalar(space, mesh, |geo| local::stiffness(geo, d, conductivity))
}

/// Mesh-weighted stiffness `sum_T h_T^2 int_T grad p . grad q`.
pub fn assemble_scaled_stiffness(space: &FeSpace, mesh: &Mesh) -> Result<SparseMatrix> {
    let d = mesh.dim();
    assemble_scalar(space, mesh, |geo| local::stiffness(geo, d, geo.diameter * geo.diameter))
}

/// Consistent P1 mass matrix.
pub fn assemble_mass(space: &FeSpace, mesh: &Mesh) -> Result<SparseMatrix> {
    let d = mesh.dim();
    assemble_scalar(space, mesh, |geo| local::mass(geo, d))
}

/// Lumped mass: diagonal with `sum_{T containing j} |T| / (d + 1)`.
pub fn lump_mass(space: &FeSpace, mesh: &Mesh) -> Result<SparseMatrix> {
    check_space(space, mesh, true)?;
    let mut diag = vec![0.0; space.ndofs()];
    let share = 1.0 / (mesh.dim() + 1) as f64;
    for_each_element(mesh, |_, verts, geo| {
        for &v in verts {
            diag[v] += geo.volume * share;
        }
    })?;
    Ok(SparseMatrix::from_diagonal(&diag))
}

/// Collects `(dof, value)` constraints, rejecting conflicting values.
pub fn constraint_map(constraints: &[(usize, f64)]) -> Result<BTreeMap<usize, f64>> {
    let mut map = BTreeMap::new();
    for &(dof, value) in constraints {
        if let Some(&first) = map.get(&dof) {
            if first != value {
                return Err(Error::ConflictingConstraint {
                    dof,
                    first,
                    second: value,
                });
            }
        }
        map.insert(dof, value);
    }
    Ok(map)
}

/// Zeroes constrained rows and columns and puts 1 on their diagonal.
pub fn dirichlet_matrix(m: &SparseMatrix, fixed: &BTreeMap<usize, f64>) -> SparseMatrix {
    let mut keep = vec![true; m.nrows()];
    for &d in fixed.keys() {
        keep[d] = false;
    }
    let masked = m.mask(&keep, &keep);
    let unit: Vec<f64> = keep.iter().map(|&k| if k { 0.0 } else { 1.0 }).collect();
    masked
        .add(1.0, &SparseMatrix::from_diagonal(&unit), 1.0)
        .expect("shapes agree")
}

/// Lifts prescribed values into the right-hand side of the free rows and
/// overwrites constrained rows with their values.
pub fn dirichlet_rhs(m: &SparseMatrix, rhs: &[f64], fixed: &BTreeMap<usize, f64>) -> Vec<f64> {
    let mut out = rhs.to_vec();
    if fixed.values().any(|&v| v != 0.0) {
        let mut values = vec![0.0; m.ncols()];
        for (&d, &v) in fixed {
            values[d] = v;
        }
        m.spmv_add(-1.0, &values, &mut out);
    }
    for (&d, &v) in fixed {
        out[d] = v;
    }
    out
}

/// Symmetric elimination of essential constraints.
pub fn apply_dirichlet(m: &SparseMatrix, rhs: &[f64], constraints: &[(usize, f64)]) -> Result<(SparseMatrix, Vec<f64>)> {
    if m.nrows() != m.ncols() || rhs.len() != m.nrows() {
        return Err(Error::DimensionMismatch(format!(
            "Dirichlet elimination on a {}x{} matrix with rhs of length {}",
            m.nrows(),
            m.ncols(),
            rhs.len()
        )));
    }
    let fixed = constraint_map(constraints)?;
    if let Some((&d, _)) = fixed.iter().find(|(&d, _)| d >= m.nrows()) {
        return Err(Error::InvalidParameter(format!("constrained dof {d} out of range")));
    }
    Ok((dirichlet_matrix(m, &fixed), dirichlet_rhs(m, rhs, &fixed)))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::solve_general;

    fn mesh1(n: usize) -> Mesh {
        Mesh::build(1, n, &[1.0]).unwrap()
    }

    #[test]
    fn pressure_stiffness_1d_and_kernel() {
        let mesh = mesh1(4);
        let q = FeSpace::new(SpaceKind::P1Scalar, &mesh);
        let ap = assemble_pressure_stiffness(&q, &mesh, 1.0).unwrap();
        let h = 0.25;
        assert!((ap.get(2, 2) - 2.0 / h).abs() < 1e-12);
        assert!((ap.get(2, 1) + 1.0 / h).abs() < 1e-12);
        assert!(ap.spmv(&[1.0; 5]).iter().all(|v| v.abs() < 1e-12));
        let ap2 = assemble_pressure_stiffness(&q, &mesh, 2.0).unwrap();
        assert_eq!(ap2, ap.scale(2.0));
    }

    #[test]
    fn mass_and_lumping_1d() {
        let mesh = mesh1(4);
        let q = FeSpace::new(SpaceKind::P1Scalar, &mesh);
        let m = assemble_mass(&q, &mesh).unwrap();
        let ml = lump_mass(&q, &mesh).unwrap();
        let h = 0.25;
        assert!((m.get(2, 1) - h / 6.0).abs() < 1e-15);
        assert!((m.get(2, 2) - 4.0 * h / 6.0).abs() < 1e-15);
        assert!((ml.get(2, 2) - h).abs() < 1e-15);
        let z = ml.add(1.0, &m, -1.0).unwrap();
        assert!(z.spmv(&[1.0; 5]).iter().all(|v| v.abs() < 1e-15));
    }

    #[test]
    fn zero_alpha_coupling_vanishes_and_constants_integrate() {
        let mesh = Mesh::build(2, 3, &[1.0, 1.0]).unwrap();
        let v = FeSpace::new(SpaceKind::MiniVector, &mesh);
        let q = FeSpace::new(SpaceKind::P1Scalar, &mesh);
        assert_eq!(assemble_coupling(&v, &q, &mesh, 0.0).unwrap().max_abs(), 0.0);

        // G applied to a constant pressure integrates div v, which vanishes
        // for interior test functions.
        let g = assemble_coupling(&v, &q, &mesh, 1.0).unwrap();
        let gp = g.spmv(&vec![1.0; q.ndofs()]);
        let interior = mesh.vertex(5);
        assert!(interior.iter().all(|&x| x > 0.0 && x < 1.0));
        assert!(gp[v.vertex_dof(5, 0)].abs() < 1e-14);
        assert!(gp[v.vertex_dof(5, 1)].abs() < 1e-14);
        for e in 0..mesh.num_elements() {
            assert!(gp[v.bubble_dof(e, 0).unwrap()].abs() < 1e-14);
        }
    }

    #[test]
    fn elasticity_annihilates_translations() {
        for (d, kind) in [(2, SpaceKind::P1Vector), (3, SpaceKind::MiniVector)] {
            let mesh = Mesh::build(d, 2, &vec![1.0; d]).unwrap();
            let v = FeSpace::new(kind, &mesh);
            let a = assemble_elasticity(&v, &mesh, 1.0, 2.0).unwrap();
            assert!(a.is_symmetric(1e-14));
            let mut t = vec![0.0; v.ndofs()];
            for vert in 0..mesh.num_vertices() {
                t[v.vertex_dof(vert, 0)] = 1.0;
            }
            assert!(a.spmv(&t).iter().all(|x| x.abs() < 1e-12));
        }
    }

    #[test]
    fn bubble_block_is_element_local() {
        let mesh = Mesh::build(2, 2, &[1.0, 1.0]).unwrap();
        let v = FeSpace::new(SpaceKind::MiniVector, &mesh);
        let a = assemble_elasticity(&v, &mesh, 1.0, 1.0).unwrap();
        let nvd = v.num_vertex_dofs();
        for e in 0..mesh.num_elements() {
            let row = v.bubble_dof(e, 0).unwrap();
            let (cols, vals) = a.row(row);
            for (&c, &val) in cols.iter().zip(vals) {
                if val != 0.0 {
                    assert!(c >= nvd && (c - nvd) / 2 == e);
                }
            }
        }
    }

    #[test]
    fn scaled_stiffness_equals_six_lumping_defects_in_1d() {
        let mesh = mesh1(8);
        let q = FeSpace::new(SpaceKind::P1Scalar, &mesh);
        let lp = assemble_scaled_stiffness(&q, &mesh).unwrap();
        let z = lump_mass(&q, &mesh)
            .unwrap()
            .add(1.0, &assemble_mass(&q, &mesh).unwrap(), -1.0)
            .unwrap();
        let diff = lp.add(1.0, &z, -6.0).unwrap();
        assert!(diff.max_abs() <= 1e-13 * lp.max_abs());
    }

    #[test]
    fn dirichlet_with_natural_end_gives_linear_solution() {
        // -p'' = 0, p(0) = 0, unit outflow flux at x = 1 => p = x.
        let mesh = mesh1(4);
        let q = FeSpace::new(SpaceKind::P1Scalar, &mesh);
        let ap = assemble_pressure_stiffness(&q, &mesh, 1.0).unwrap();
        let mut rhs = vec![0.0; 5];
        rhs[4] = 1.0;
        let (m, b) = apply_dirichlet(&ap, &rhs, &[(0, 0.0)]).unwrap();
        assert!(m.is_symmetric(0.0));
        let x = solve_general(&m, &b).unwrap();
        for (i, xi) in x.iter().enumerate() {
            assert!((xi - mesh.vertex(i)[0]).abs() < 1e-12);
        }
    }

    #[test]
    fn fully_constrained_system_returns_values() {
        let m = SparseMatrix::from_triplets(2, 2, &[(0, 0, 3.0), (0, 1, 1.0), (1, 0, 1.0), (1, 1, 2.0)]).unwrap();
        let (k, b) = apply_dirichlet(&m, &[5.0, 6.0], &[(0, 1.5), (1, -2.0)]).unwrap();
        assert_eq!(solve_general(&k, &b).unwrap(), vec![1.5, -2.0]);
        assert!(matches!(
            apply_dirichlet(&m, &[0.0, 0.0], &[(0, 1.0), (0, 2.0)]),
            Err(Error::ConflictingConstraint { .. })
        ));
    }
}
