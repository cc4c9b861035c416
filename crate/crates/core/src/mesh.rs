//! Uniform structured simplicial meshes of intervals, rectangles and boxes.
//!
//! Vertices are numbered lexicographically with the x index running fastest.
//! Squares are cut along the diagonal from their lower-left to upper-right
//! corner, cubes are cut into the six Kuhn tetrahedra sharing the main
//! diagonal. Element vertex lists are stored in increasing global order, so
//! assembly over a given mesh is bit-reproducible.

use std::collections::HashMap;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Side of an axis-aligned domain.
///
/// `Left`/`Right` bound the x axis. In 2D `Bottom`/`Top` bound y; in 3D
/// `Front`/`Back` bound y and `Bottom`/`Top` bound z.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum Side {
    Left,
    Right,
    Bottom,
    Top,
    Front,
    Back,
}

impl Side {
    /// Axis index and whether the side sits at the upper end of that axis.
    pub fn axis(self, dim: usize) -> Result<(usize, bool)> {
        let found = match (self, dim) {
            (Side::Left, _) => Some((0, false)),
            (Side::Right, _) => Some((0, true)),
            (Side::Bottom, 2) => Some((1, false)),
            (Side::Top, 2) => Some((1, true)),
            (Side::Front, 3) => Some((1, false)),
            (Side::Back, 3) => Some((1, true)),
            (Side::Bottom, 3) => Some((2, false)),
            (Side::Top, 3) => Some((2, true)),
            _ => None,
        };
        match found {
            Some(a) if (1..=3).contains(&dim) => Ok(a),
            _ => Err(Error::UnknownSide { side: self, dim }),
        }
    }

    /// All sides that exist in the given dimension.
    pub fn all(dim: usize) -> &'static [Side] {
        match dim {
            1 => &[Side::Left, Side::Right],
            2 => &[Side::Left, Side::Right, Side::Bottom, Side::Top],
            _ => &[
                Side::Left,
                Side::Right,
                Side::Front,
                Side::Back,
                Side::Bottom,
                Side::Top,
            ],
        }
    }
}

/// A boundary facet returned by [`Mesh::boundary_facets`].
#[derive(Debug, Clone, PartialEq)]
pub struct Facet {
    pub vertices: Vec<usize>,
    /// Outward unit normal.
    pub normal: Vec<f64>,
    /// (d-1)-dimensional measure; 1 for the point facets of 1D meshes.
    pub measure: f64,
}

#[derive(Debug, Clone)]
struct TaggedFacet {
    vertices: Vec<usize>,
    side: Side,
}

/// Per-element geometric data used by assembly.
#[derive(Debug, Clone, PartialEq)]
pub struct ElementGeometry {
    pub volume: f64,
    /// Gradients of the d+1 barycentric coordinates; components past `dim`
    /// are zero.
    pub gradients: Vec<[f64; 3]>,
    /// Element diameter (longest edge).
    pub diameter: f64,
    /// Lengths of all (d+1)d/2 edges, ordered by vertex pair (0,1), (0,2), ...
    pub edge_lengths: Vec<f64>,
    /// Height of each vertex over its opposite facet, `1 / |grad lambda_j|`.
    pub heights: Vec<f64>,
    /// Shape constant `max_{j != k} h_T^2 / (|h_j| |h_k|)` over vertex heights.
    pub shape_constant: f64,
}

#[derive(Debug, Clone)]
pub struct Mesh {
    dim: usize,
    cells: usize,
    extent: Vec<f64>,
    coords: Vec<[f64; 3]>,
    elements: Vec<usize>,
    facets: Vec<TaggedFacet>,
}

impl Mesh {
    /// Builds the uniform simplicial mesh with `cells` intervals per axis.
    pub fn build(dim: usize, cells: usize, extent: &[f64]) -> Result<Mesh> {
        build_simplicial_mesh(dim, cells, extent)
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    /// Cells per axis.
    pub fn cells(&self) -> usize {
        self.cells
    }

    pub fn extent(&self) -> &[f64] {
        &self.extent
    }

    /// Nominal mesh size, the cell width along the first axis.
    pub fn h(&self) -> f64 {
        self.extent[0] / self.cells as f64
    }

    pub fn num_vertices(&self) -> usize {
        self.coords.len()
    }

    pub fn num_elements(&self) -> usize {
        self.elements.len() / (self.dim + 1)
    }

    /// Vertex coordinates, `dim` components.
    pub fn vertex(&self, v: usize) -> &[f64] {
        &self.coords[v][..self.dim]
    }

    pub fn element(&self, e: usize) -> &[usize] {
        let k = self.dim + 1;
        &self.elements[e * k..(e + 1) * k]
    }

    pub fn elements(&self) -> impl Iterator<Item = &[usize]> {
        self.elements.chunks_exact(self.dim + 1)
    }

    /// Domain measure, the product of the extents.
    pub fn domain_volume(&self) -> f64 {
        self.extent.iter().product()
    }

    pub fn element_geometry(&self, e: usize) -> Result<ElementGeometry> {
        if e >= self.num_elements() {
            return Err(Error::ElementOutOfRange {
                id: e,
                count: self.num_elements(),
            });
        }
        let geo = simplex_geometry(self.dim, self.element(e).iter().map(|&v| self.coords[v]));
        if !(geo.volume > 0.0) {
            return Err(Error::DegenerateElement(e));
        }
        Ok(geo)
    }

    /// Boundary facets on `side` with their outward normals.
    pub fn boundary_facets(&self, side: Side) -> Result<Vec<Facet>> {
        let (axis, upper) = side.axis(self.dim)?;
        let mut normal = vec![0.0; self.dim];
        normal[axis] = if upper { 1.0 } else { -1.0 };
        Ok(self
            .facets
            .iter()
            .filter(|f| f.side == side)
            .map(|f| Facet {
                vertices: f.vertices.clone(),
                normal: normal.clone(),
                measure: facet_measure(self.dim, f.vertices.iter().map(|&v| self.coords[v])),
            })
            .collect())
    }

    /// Vertices lying on `side`, in increasing order.
    pub fn vertices_on_side(&self, side: Side) -> Result<Vec<usize>> {
        let (axis, upper) = side.axis(self.dim)?;
        let target = if upper { self.extent[axis] } else { 0.0 };
        Ok((0..self.num_vertices())
            .filter(|&v| self.coords[v][axis] == target)
            .collect())
    }

    /// Finds an element containing `point` and the barycentric coordinates
    /// of the point in it. Points on shared facets resolve to the lowest
    /// element id.
    pub fn locate(&self, point: &[f64]) -> Option<(usize, Vec<f64>)> {
        if point.len() != self.dim {
            return None;
        }
        let tol = 1e-12;
        for (e, verts) in self.elements().enumerate() {
            let geo = simplex_geometry(self.dim, verts.iter().map(|&v| self.coords[v]));
            let x0 = self.coords[verts[0]];
            let bary: Vec<f64> = (0..=self.dim)
                .map(|j| {
                    let base = if j == 0 { 1.0 } else { 0.0 };
                    base + (0..self.dim)
                        .map(|a| geo.gradients[j][a] * (point[a] - x0[a]))
                        .sum::<f64>()
                })
                .collect();
            if bary.iter().all(|&l| l >= -tol) {
                return Some((e, bary));
            }
        }
        None
    }

    /// Checks that every interior facet is shared by exactly two elements and
    /// every facet seen once lies on the domain boundary.
    pub fn check_conformity(&self) -> bool {
        let counts = facet_counts(self.dim, &self.elements);
        counts.iter().all(|(facet, &count)| match count {
            1 => self.facet_side(facet).is_some(),
            2 => self.facet_side(facet).is_none(),
            _ => false,
        })
    }

    fn facet_side(&self, facet: &[usize]) -> Option<Side> {
        Side::all(self.dim).iter().copied().find(|&side| {
            let (axis, upper) = side.axis(self.dim).expect("side valid for dim");
            let target = if upper { self.extent[axis] } else { 0.0 };
            facet.iter().all(|&v| self.coords[v][axis] == target)
        })
    }
}

pub fn build_simplicial_mesh(dim: usize, cells: usize, extent: &[f64]) -> Result<Mesh> {
    if !(1..=3).contains(&dim) {
        return Err(Error::InvalidMesh(format!("dimension {dim} not in 1..=3")));
    }
    if cells == 0 {
        return Err(Error::InvalidMesh("cells per axis must be at least 1".into()));
    }
    if extent.len() != dim {
        return Err(Error::InvalidMesh(format!(
            "expected {dim} extents, got {}",
            extent.len()
        )));
    }
    if extent.iter().any(|&x| !(x > 0.0) || !x.is_finite()) {
        return Err(Error::InvalidMesh(format!("extent {extent:?} must be positive")));
    }

    let n = cells;
    let np = n + 1;
    let axis_points = |a: usize| -> Vec<f64> {
        (0..np)
            .map(|i| if i == n { extent[a] } else { extent[a] * i as f64 / n as f64 })
            .collect()
    };

    let mut coords = Vec::new();
    let mut elements = Vec::new();
    match dim {
        1 => {
            let xs = axis_points(0);
            coords.extend(xs.iter().map(|&x| [x, 0.0, 0.0]));
            for i in 0..n {
                elements.extend_from_slice(&[i, i + 1]);
            }
        }
        2 => {
            let (xs, ys) = (axis_points(0), axis_points(1));
            for &y in &ys {
                for &x in &xs {
                    coords.push([x, y, 0.0]);
                }
            }
            let id = |i: usize, j: usize| i + np * j;
            for j in 0..n {
                for i in 0..n {
                    let (v00, v10, v01, v11) = (id(i, j), id(i + 1, j), id(i, j + 1), id(i + 1, j + 1));
                    for tri in [[v00, v10, v11], [v00, v01, v11]] {
                        let mut t = tri;
                        t.sort_unstable();
                        elements.extend_from_slice(&t);
                    }
                }
            }
        }
        _ => {
            let (xs, ys, zs) = (axis_points(0), axis_points(1), axis_points(2));
            for &z in &zs {
                for &y in &ys {
                    for &x in &xs {
                        coords.push([x, y, z]);
                    }
                }
            }
            let id = |c: [usize; 3]| c[0] + np * (c[1] + np * c[2]);
            const KUHN: [[usize; 3]; 6] = [
                [0, 1, 2],
                [0, 2, 1],
                [1, 0, 2],
                [1, 2, 0],
                [2, 0, 1],
                [2, 1, 0],
            ];
            for k in 0..n {
                for j in 0..n {
                    for i in 0..n {
                        for perm in KUHN {
                            let mut c = [i, j, k];
                            let mut tet = [id(c); 4];
                            for (step, &axis) in perm.iter().enumerate() {
                                c[axis] += 1;
                                tet[step + 1] = id(c);
                            }
                            tet.sort_unstable();
                            elements.extend_from_slice(&tet);
                        }
                    }
                }
            }
        }
    }

    let mut mesh = Mesh {
        dim,
        cells,
        extent: extent.to_vec(),
        coords,
        elements,
        facets: Vec::new(),
    };

    let mut facets: Vec<TaggedFacet> = facet_counts(dim, &mesh.elements)
        .into_iter()
        .filter(|&(_, count)| count == 1)
        .filter_map(|(vertices, _)| {
            mesh.facet_side(&vertices)
                .map(|side| TaggedFacet { vertices, side })
        })
        .collect();
    facets.sort_by(|a, b| (a.side, &a.vertices).cmp(&(b.side, &b.vertices)));
    mesh.facets = facets;
    Ok(mesh)
}

/// Free-function form of [`Mesh::element_geometry`].
pub fn element_geometry(mesh: &Mesh, e: usize) -> Result<ElementGeometry> {
    mesh.element_geometry(e)
}

/// Free-function form of [`Mesh::boundary_facets`].
pub fn boundary_facets(mesh: &Mesh, side: Side) -> Result<Vec<Facet>> {
    mesh.boundary_facets(side)
}

fn facet_counts(dim: usize, elements: &[usize]) -> HashMap<Vec<usize>, usize> {
    let mut counts = HashMap::new();
    for verts in elements.chunks_exact(dim + 1) {
        for skip in 0..=dim {
            let facet: Vec<usize> = verts
                .iter()
                .enumerate()
                .filter(|&(j, _)| j != skip)
                .map(|(_, &v)| v)
                .collect();
            *counts.entry(facet).or_insert(0) += 1;
        }
    }
    counts
}

fn sub(a: [f64; 3], b: [f64; 3]) -> [f64; 3] {
    [a[0] - b[0], a[1] - b[1], a[2] - b[2]]
}

fn norm(a: [f64; 3]) -> f64 {
    (a[0] * a[0] + a[1] * a[1] + a[2] * a[2]).sqrt()
}

fn facet_measure(dim: usize, mut pts: impl Iterator<Item = [f64; 3]>) -> f64 {
    match dim {
        1 => 1.0,
        2 => {
            let (a, b) = (pts.next().unwrap(), pts.next().unwrap());
            norm(sub(b, a))
        }
        _ => {
            let (a, b, c) = (pts.next().unwrap(), pts.next().unwrap(), pts.next().unwrap());
            let (u, v) = (sub(b, a), sub(c, a));
            let cross = [
                u[1] * v[2] - u[2] * v[1],
                u[2] * v[0] - u[0] * v[2],
                u[0] * v[1] - u[1] * v[0],
            ];
            0.5 * norm(cross)
        }
    }
}

/// Geometry of the simplex spanned by `pts` (d+1 points, padded to 3D).
pub(crate) fn simplex_geometry(dim: usize, pts: impl Iterator<Item = [f64; 3]>) -> ElementGeometry {
    let pts: Vec<[f64; 3]> = pts.collect();
    debug_assert_eq!(pts.len(), dim + 1);

    // Jacobian columns x_k - x_0, padded with the identity beyond `dim`.
    let mut jac = nalgebra::Matrix3::<f64>::identity();
    for k in 1..=dim {
        let d = sub(pts[k], pts[0]);
        for a in 0..dim {
            jac[(a, k - 1)] = d[a];
        }
    }
    let det = jac.determinant();
    let factorial = [1.0, 1.0, 2.0, 6.0][dim];
    let volume = det.abs() / factorial;

    let mut gradients = vec![[0.0; 3]; dim + 1];
    if let Some(inv) = jac.try_inverse() {
        for k in 1..=dim {
            for a in 0..dim {
                gradients[k][a] = inv[(k - 1, a)];
                gradients[0][a] -= inv[(k - 1, a)];
            }
        }
    }

    let mut edge_lengths = Vec::with_capacity(dim * (dim + 1) / 2);
    for j in 0..=dim {
        for k in j + 1..=dim {
            edge_lengths.push(norm(sub(pts[k], pts[j])));
        }
    }
    let diameter = edge_lengths.iter().copied().fold(0.0, f64::max);
    let heights: Vec<f64> = gradients.iter().map(|g| 1.0 / norm(*g)).collect();
    let mut shape_constant: f64 = 0.0;
    for j in 0..=dim {
        for k in 0..=dim {
            if j != k {
                shape_constant = shape_constant.max(diameter * diameter / (heights[j] * heights[k]));
            }
        }
    }

    ElementGeometry {
        volume,
        gradients,
        diameter,
        edge_lengths,
        heights,
        shape_constant,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    #[test]
    fn counts_match_structured_split() {
        let m1 = Mesh::build(1, 4, &[1.0]).unwrap();
        assert_eq!((m1.num_elements(), m1.num_vertices()), (4, 5));
        assert_eq!(m1.h(), 0.25);

        let m2 = Mesh::build(2, 2, &[1.0, 1.0]).unwrap();
        assert_eq!((m2.num_elements(), m2.num_vertices()), (8, 9));

        let m3 = Mesh::build(3, 2, &[1.0, 1.0, 1.0]).unwrap();
        assert_eq!(m3.num_elements(), 48);
        let vol: f64 = (0..48).map(|e| m3.element_geometry(e).unwrap().volume).sum();
        assert!((vol - 1.0).abs() <= 1e-12);
    }

    #[test]
    fn rejects_bad_requests() {
        assert!(matches!(Mesh::build(2, 0, &[1.0, 1.0]), Err(Error::InvalidMesh(_))));
        assert!(matches!(Mesh::build(1, 3, &[-1.0]), Err(Error::InvalidMesh(_))));
        assert!(matches!(Mesh::build(2, 3, &[1.0, 0.0]), Err(Error::InvalidMesh(_))));
        assert!(matches!(Mesh::build(4, 3, &[1.0; 4]), Err(Error::InvalidMesh(_))));
    }

    #[test]
    fn element_geometry_basics() {
        let m1 = Mesh::build(1, 4, &[1.0]).unwrap();
        let g = m1.element_geometry(2).unwrap();
        assert_relative_eq!(g.volume, 0.25);
        assert_relative_eq!(g.gradients[0][0], -4.0);
        assert_relative_eq!(g.gradients[1][0], 4.0);
        assert_relative_eq!(g.shape_constant, 1.0);

        let h = 0.5;
        let m2 = Mesh::build(2, 2, &[1.0, 1.0]).unwrap();
        for e in 0..m2.num_elements() {
            let g = m2.element_geometry(e).unwrap();
            assert_relative_eq!(g.volume, h * h / 2.0, max_relative = 1e-14);
            assert_relative_eq!(g.diameter, h * 2f64.sqrt(), max_relative = 1e-14);
        }

        let m3 = Mesh::build(3, 1, &[1.0, 1.0, 1.0]).unwrap();
        for e in 0..6 {
            let g = m3.element_geometry(e).unwrap();
            assert!((g.volume - 1.0 / 6.0).abs() <= 1e-14);
            assert!(g.shape_constant >= 1.0);
        }

        assert!(matches!(
            m3.element_geometry(6),
            Err(Error::ElementOutOfRange { id: 6, count: 6 })
        ));
    }

    #[test]
    fn barycentric_gradients_sum_to_zero() {
        let m = Mesh::build(3, 2, &[1.0, 2.0, 0.5]).unwrap();
        for e in 0..m.num_elements() {
            let g = m.element_geometry(e).unwrap();
            for a in 0..3 {
                let s: f64 = g.gradients.iter().map(|v| v[a]).sum();
                assert!(s.abs() < 1e-12);
            }
        }
    }

    #[test]
    fn boundary_facets_by_side() {
        let m2 = Mesh::build(2, 2, &[1.0, 1.0]).unwrap();
        let top = m2.boundary_facets(Side::Top).unwrap();
        assert_eq!(top.len(), 2);
        for f in &top {
            assert_eq!(f.normal, vec![0.0, 1.0]);
        }

        let m1 = Mesh::build(1, 4, &[1.0]).unwrap();
        let left = m1.boundary_facets(Side::Left).unwrap();
        assert_eq!(left.len(), 1);
        assert_eq!(left[0].vertices, vec![0]);
        assert_eq!(left[0].normal, vec![-1.0]);

        let m3 = Mesh::build(3, 2, &[1.0, 1.0, 1.0]).unwrap();
        let top3 = m3.boundary_facets(Side::Top).unwrap();
        assert_eq!(top3.len(), 8);
        let area: f64 = top3.iter().map(|f| f.measure).sum();
        assert!((area - 1.0).abs() < 1e-14);

        assert!(matches!(
            m1.boundary_facets(Side::Top),
            Err(Error::UnknownSide { .. })
        ));
        assert!(m2.boundary_facets(Side::Front).is_err());
    }

    #[test]
    fn meshes_are_conforming() {
        for (d, ext) in [(1, vec![1.0]), (2, vec![1.0, 2.0]), (3, vec![1.0, 1.0, 1.0])] {
            for n in 1..4 {
                assert!(Mesh::build(d, n, &ext).unwrap().check_conformity());
            }
        }
    }

    #[test]
    fn volume_sums_and_shape_constants_are_refinement_invariant() {
        for (d, ext) in [(1, vec![2.0]), (2, vec![1.0, 3.0]), (3, vec![1.0, 0.5, 2.0])] {
            let mut shape = None;
            for n in [2, 4, 8] {
                let m = Mesh::build(d, n, &ext).unwrap();
                let vol: f64 = (0..m.num_elements())
                    .map(|e| m.element_geometry(e).unwrap().volume)
                    .sum();
                assert!((vol - m.domain_volume()).abs() <= 1e-12 * m.domain_volume());
                let mut cts: Vec<f64> = (0..m.num_elements())
                    .map(|e| m.element_geometry(e).unwrap().shape_constant)
                    .collect();
                cts.sort_by(f64::total_cmp);
                cts.dedup_by(|a, b| (*a - *b).abs() < 1e-9);
                match &shape {
                    None => shape = Some(cts),
                    Some(prev) => {
                        assert_eq!(prev.len(), cts.len());
                        for (a, b) in prev.iter().zip(&cts) {
                            assert!((a - b).abs() < 1e-9);
                        }
                    }
                }
            }
        }
    }

    #[test]
    fn locate_interior_and_vertex_points() {
        let m = Mesh::build(2, 4, &[1.0, 1.0]).unwrap();
        let (_, bary) = m.locate(&[0.25, 0.25]).unwrap();
        assert!(bary.iter().any(|&l| (l - 1.0).abs() < 1e-12));
        assert!(m.locate(&[1.5, 0.5]).is_none());
    }
}
