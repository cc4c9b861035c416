use std::fmt;
use std::sync::Arc;

use super::local;
use super::space::{FeSpace, Scheme, SpaceKind};
use crate::biot::ProblemDefinition;
use crate::error::{Error, Result};
use crate::mesh::{Facet, Mesh, Side};

/// Body force `f(x, t)` returning `d` components.
pub type VectorField = Arc<dyn Fn(&[f64], f64) -> Vec<f64> + Send + Sync>;
/// Scalar field `s(x, t)`.
pub type ScalarField = Arc<dyn Fn(&[f64], f64) -> f64 + Send + Sync>;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DisplacementBc {
    pub side: Side,
    pub component: usize,
    pub value: f64,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PressureBc {
    pub side: Side,
    pub value: f64,
}

/// Axis-aligned box restricting a traction to part of a side.
#[derive(Debug, Clone, PartialEq)]
pub struct Patch {
    pub lower: Vec<f64>,
    pub upper: Vec<f64>,
}

impl Patch {
    /// Box test on every axis except `skip` (the normal of the loaded side).
    fn contains(&self, x: &[f64], tol: f64, skip: usize) -> bool {
        x.iter()
            .zip(self.lower.iter().zip(&self.upper))
            .enumerate()
            .all(|(a, (&xi, (&lo, &hi)))| a == skip || (xi >= lo - tol && xi <= hi + tol))
    }
}

/// Surface force density applied on a side (or a patch of it).
#[derive(Debug, Clone, PartialEq)]
pub struct Traction {
    pub side: Side,
    pub vector: Vec<f64>,
    pub patch: Option<Patch>,
}

/// Point injection `amplitude(t) * delta(x - location)` in the flow equation.
#[derive(Clone)]
pub struct PointSource {
    pub location: Vec<f64>,
    pub amplitude: Arc<dyn Fn(f64) -> f64 + Send + Sync>,
}

impl fmt::Debug for PointSource {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("PointSource")
            .field("location", &self.location)
            .finish_non_exhaustive()
    }
}

/// Essential and natural boundary data plus point sources.
///
/// Sides without a displacement entry for a component are traction-free in
/// that component; sides without a pressure entry are no-flow.
#[derive(Debug, Clone, Default)]
pub struct BoundaryConditions {
    pub displacement: Vec<DisplacementBc>,
    pub pressure: Vec<PressureBc>,
    pub tractions: Vec<Traction>,
    pub point_sources: Vec<PointSource>,
}

impl BoundaryConditions {
    pub fn fix_displacement(mut self, side: Side, component: usize, value: f64) -> Self {
        self.displacement.push(DisplacementBc { side, component, value });
        self
    }

    pub fn clamp(mut self, side: Side, dim: usize) -> Self {
        for component in 0..dim {
            self.displacement.push(DisplacementBc { side, component, value: 0.0 });
        }
        self
    }

    pub fn fix_pressure(mut self, side: Side, value: f64) -> Self {
        self.pressure.push(PressureBc { side, value });
        self
    }

    pub fn traction(mut self, side: Side, vector: Vec<f64>, patch: Option<Patch>) -> Self {
        self.tractions.push(Traction { side, vector, patch });
        self
    }

    pub fn point_source(mut self, location: Vec<f64>, amplitude: impl Fn(f64) -> f64 + Send + Sync + 'static) -> Self {
        self.point_sources.push(PointSource {
            location,
            amplitude: Arc::new(amplitude),
        });
        self
    }

    /// Applies the essential conditions to the displacement and pressure
    /// spaces.
    pub fn constrain_spaces(&self, mesh: &Mesh, space_u: &mut FeSpace, space_p: &mut FeSpace) -> Result<()> {
        for bc in &self.displacement {
            if bc.component >= mesh.dim() {
                return Err(Error::InvalidParameter(format!(
                    "displacement component {} in {}D",
                    bc.component,
                    mesh.dim()
                )));
            }
            for v in mesh.vertices_on_side(bc.side)? {
                space_u.constrain(space_u.vertex_dof(v, bc.component), bc.value)?;
            }
        }
        for bc in &self.pressure {
            for v in mesh.vertices_on_side(bc.side)? {
                space_p.constrain(v, bc.value)?;
            }
        }
        Ok(())
    }
}

/// Volume sources of the momentum and mass balance.
#[derive(Clone, Default)]
pub struct SourceTerms {
    pub body_force: Option<VectorField>,
    pub fluid_source: Option<ScalarField>,
}

impl fmt::Debug for SourceTerms {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("SourceTerms")
            .field("body_force", &self.body_force.is_some())
            .field("fluid_source", &self.fluid_source.is_some())
            .finish()
    }
}

fn facets_in_patch(mesh: &Mesh, traction: &Traction) -> Result<Vec<Facet>> {
    let facets = mesh.boundary_facets(traction.side)?;
    let Some(patch) = &traction.patch else {
        return Ok(facets);
    };
    if patch.lower.len() != mesh.dim() || patch.upper.len() != mesh.dim() {
        return Err(Error::PatchMisaligned(format!(
            "patch bounds have {} / {} components in {}D",
            patch.lower.len(),
            patch.upper.len(),
            mesh.dim()
        )));
    }
    let (normal_axis, _) = traction.side.axis(mesh.dim())?;
    let tol = 1e-9 * mesh.h();
    let mut selected = Vec::new();
    for f in facets {
        let n = f.vertices.len() as f64;
        let centroid: Vec<f64> = (0..mesh.dim())
            .map(|a| f.vertices.iter().map(|&v| mesh.vertex(v)[a]).sum::<f64>() / n)
            .collect();
        let inside = f.vertices.iter().filter(|&&v| patch.contains(mesh.vertex(v), tol, normal_axis)).count();
        if patch.contains(&centroid, -tol, normal_axis) {
            if inside != f.vertices.len() {
                return Err(Error::PatchMisaligned(format!(
                    "facet {:?} straddles the patch boundary",
                    f.vertices
                )));
            }
            selected.push(f);
        } else if patch.contains(&centroid, tol, normal_axis) && inside != f.vertices.len() {
            return Err(Error::PatchMisaligned(format!(
                "facet {:?} straddles the patch boundary",
                f.vertices
            )));
        }
    }
    Ok(selected)
}

/// Momentum load `f` and flow load `g` at time `t` for the given scheme.
///
/// Body forces and fluid sources are integrated through their P1
/// interpolants; point sources enter through the P1 basis evaluated at the
/// source location.
pub fn assemble_rhs(problem: &ProblemDefinition, scheme: Scheme, t: f64) -> Result<(Vec<f64>, Vec<f64>)> {
    let mesh = &problem.mesh;
    let d = mesh.dim();
    let space_u = FeSpace::new(scheme.displacement_kind(), mesh);
    let space_p = FeSpace::new(SpaceKind::P1Scalar, mesh);
    let mut f = vec![0.0; space_u.ndofs()];
    let mut g = vec![0.0; space_p.ndofs()];

    for traction in &problem.bcs.tractions {
        if traction.vector.len() != d {
            return Err(Error::InvalidParameter(format!(
                "traction with {} components in {}D",
                traction.vector.len(),
                d
            )));
        }
        for facet in facets_in_patch(mesh, traction)? {
            let share = facet.measure / facet.vertices.len() as f64;
            for &v in &facet.vertices {
                for a in 0..d {
                    f[space_u.vertex_dof(v, a)] += traction.vector[a] * share;
                }
            }
        }
    }

    let body = problem.sources.body_force.as_ref();
    let fluid = problem.sources.fluid_source.as_ref();
    let weight = &problem.params.fluid_weight[..d];
    let gravity = weight.iter().any(|&w| w != 0.0);
    if body.is_some() || fluid.is_some() || gravity {
        let nv = d + 1;
        for e in 0..mesh.num_elements() {
            let geo = mesh.element_geometry(e)?;
            let verts = mesh.element(e);
            let mass = local::mass(&geo, d);
            // int lambda_k b, for the bubble rows of the body force.
            let bubble_weight = {
                let mut exps = vec![1u32; nv];
                exps[0] = 2;
                local::bubble_scale(d) * local::simplex_monomial(d, &exps, geo.volume)
            };
            if let Some(body) = body {
                let values: Vec<Vec<f64>> = verts.iter().map(|&v| body(mesh.vertex(v), t)).collect();
                for (j, &vj) in verts.iter().enumerate() {
                    for a in 0..d {
                        f[space_u.vertex_dof(vj, a)] += (0..nv).map(|k| mass[j][k] * values[k][a]).sum::<f64>();
                    }
                }
                if let Some(b0) = space_u.bubble_dof(e, 0) {
                    for a in 0..d {
                        f[b0 + a] += bubble_weight * values.iter().map(|v| v[a]).sum::<f64>();
                    }
                }
            }
            if let Some(fluid) = fluid {
                let values: Vec<f64> = verts.iter().map(|&v| fluid(mesh.vertex(v), t)).collect();
                for (j, &vj) in verts.iter().enumerate() {
                    g[vj] += (0..nv).map(|k| mass[j][k] * values[k]).sum::<f64>();
                }
            }
            if gravity {
                let k = problem.params.conductivity;
                for (j, &vj) in verts.iter().enumerate() {
                    let flux: f64 = (0..d).map(|a| weight[a] * geo.gradients[j][a]).sum();
                    g[vj] += k * geo.volume * flux;
                }
            }
        }
    }

    for src in &problem.bcs.point_sources {
        let (e, bary) = mesh
            .locate(&src.location)
            .ok_or_else(|| Error::SourceOutsideDomain(src.location.clone()))?;
        let amp = (src.amplitude)(t);
        for (&v, &l) in mesh.element(e).iter().zip(&bary) {
            g[v] += amp * l;
        }
    }
    Ok((f, g))
}
