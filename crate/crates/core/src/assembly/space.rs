use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::mesh::Mesh;

/// Finite-element pair for displacement and pressure.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Scheme {
    P1P1,
    Mini,
}

impl Scheme {
    pub fn name(self) -> &'static str {
        match self {
            Scheme::P1P1 => "p1p1",
            Scheme::Mini => "mini",
        }
    }

    pub fn displacement_kind(self) -> SpaceKind {
        match self {
            Scheme::P1P1 => SpaceKind::P1Vector,
            Scheme::Mini => SpaceKind::MiniVector,
        }
    }
}

impl std::fmt::Display for Scheme {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(self.name())
    }
}

impl std::str::FromStr for Scheme {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().replace(['-', '_'], "").as_str() {
            "p1p1" => Ok(Scheme::P1P1),
            "mini" => Ok(Scheme::Mini),
            _ => Err(Error::InvalidParameter(format!("unknown scheme '{s}'"))),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum SpaceKind {
    P1Vector,
    P1Scalar,
    /// Vector P1 enriched with one cubic (or quartic, in 3D) bubble per
    /// element and component.
    MiniVector,
}

/// Degree-of-freedom layout of a finite-element space.
///
/// Vertex dofs come first (`d * vertex + component` for vector spaces), then
/// bubble dofs (`d * n_vertices + d * element + component`).
#[derive(Debug, Clone, PartialEq)]
pub struct FeSpace {
    kind: SpaceKind,
    dim: usize,
    num_vertices: usize,
    num_elements: usize,
    fixed: BTreeMap<usize, f64>,
}

impl FeSpace {
    pub fn new(kind: SpaceKind, mesh: &Mesh) -> Self {
        FeSpace {
            kind,
            dim: mesh.dim(),
            num_vertices: mesh.num_vertices(),
            num_elements: mesh.num_elements(),
            fixed: BTreeMap::new(),
        }
    }

    pub fn kind(&self) -> SpaceKind {
        self.kind
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn components(&self) -> usize {
        match self.kind {
            SpaceKind::P1Scalar => 1,
            _ => self.dim,
        }
    }

    pub fn has_bubbles(&self) -> bool {
        self.kind == SpaceKind::MiniVector
    }

    pub fn ndofs(&self) -> usize {
        let nc = self.components();
        let bubbles = if self.has_bubbles() { nc * self.num_elements } else { 0 };
        nc * self.num_vertices + bubbles
    }

    /// Number of vertex-based (P1) dofs.
    pub fn num_vertex_dofs(&self) -> usize {
        self.components() * self.num_vertices
    }

    pub fn vertex_dof(&self, vertex: usize, component: usize) -> usize {
        self.components() * vertex + component
    }

    pub fn bubble_dof(&self, element: usize, component: usize) -> Option<usize> {
        self.has_bubbles()
            .then(|| self.dim * self.num_vertices + self.dim * element + component)
    }

    /// Global dofs of element `e`: vertex dofs (vertex-major) then bubbles.
    pub fn element_dofs(&self, e: usize, vertices: &[usize]) -> Vec<usize> {
        let nc = self.components();
        let mut dofs: Vec<usize> = vertices
            .iter()
            .flat_map(|&v| (0..nc).map(move |a| nc * v + a))
            .collect();
        if self.has_bubbles() {
            dofs.extend((0..nc).map(|a| self.dim * self.num_vertices + self.dim * e + a));
        }
        dofs
    }

    /// Prescribes `value` at `dof`. Re-prescribing the same value is a no-op.
    pub fn constrain(&mut self, dof: usize, value: f64) -> Result<()> {
        if dof >= self.ndofs() {
            return Err(Error::InvalidParameter(format!(
                "dof {dof} outside a space of {} dofs",
                self.ndofs()
            )));
        }
        match self.fixed.get(&dof) {
            Some(&first) if first != value => Err(Error::ConflictingConstraint {
                dof,
                first,
                second: value,
            }),
            _ => {
                self.fixed.insert(dof, value);
                Ok(())
            }
        }
    }

    pub fn constraints(&self) -> &BTreeMap<usize, f64> {
        &self.fixed
    }

    pub fn is_fixed(&self, dof: usize) -> bool {
        self.fixed.contains_key(&dof)
    }

    pub fn free_mask(&self) -> Vec<bool> {
        let mut free = vec![true; self.ndofs()];
        for &d in self.fixed.keys() {
            free[d] = false;
        }
        free
    }

    /// Vector of prescribed values, zero on free dofs.
    pub fn fixed_values(&self) -> Vec<f64> {
        let mut v = vec![0.0; self.ndofs()];
        for (&d, &x) in &self.fixed {
            v[d] = x;
        }
        v
    }
}
