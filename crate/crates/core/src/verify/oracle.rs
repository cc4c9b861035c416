//! Dense reference assembly by numerical quadrature, sharing nothing with
//! the sparse assembly beyond the mesh.

use std::collections::BTreeMap;

use nalgebra::{DMatrix, DVector};
use serde::{Deserialize, Serialize};

use super::spectral::dense;
use crate::assembly::Scheme;
use crate::biot::{DiscreteBiotSystem, ProblemDefinition, SolutionState};
use crate::error::{Error, Result};
use crate::mesh::Mesh;

/// Largest total dof count accepted by the oracle.
pub const ORACLE_DOF_LIMIT: usize = 2000;

/// Gauss-Legendre nodes and weights on `[0, 1]`.
fn gauss_legendre(n: usize) -> Vec<(f64, f64)> {
    let mut out = Vec::with_capacity(n);
    for i in 0..n {
        let mut x = (std::f64::consts::PI * (i as f64 + 0.75) / (n as f64 + 0.5)).cos();
        let mut dp = 0.0;
        for _ in 0..100 {
            let (mut p0, mut p1) = (1.0, x);
            for k in 2..=n {
                let p2 = ((2 * k - 1) as f64 * x * p1 - (k - 1) as f64 * p0) / k as f64;
                p0 = p1;
                p1 = p2;
            }
            dp = n as f64 * (x * p1 - p0) / (x * x - 1.0);
            let dx = p1 / dp;
            x -= dx;
            if dx.abs() < 1e-16 {
                break;
            }
        }
        let w = 2.0 / ((1.0 - x * x) * dp * dp);
        out.push(((1.0 - x) / 2.0, w / 2.0));
    }
    out
}

/// Collapsed-coordinate rule on the reference simplex `{xi >= 0, sum <= 1}`.
fn simplex_rule(dim: usize, n: usize) -> Vec<(Vec<f64>, f64)> {
    let gl = gauss_legendre(n);
    match dim {
        0 => vec![(vec![], 1.0)],
        1 => gl.iter().map(|&(x, w)| (vec![x], w)).collect(),
        2 => {
            let mut r = Vec::new();
            for &(u, wu) in &gl {
                for &(v, wv) in &gl {
                    r.push((vec![u, v * (1.0 - u)], wu * wv * (1.0 - u)));
                }
            }
            r
        }
        _ => {
            let mut r = Vec::new();
            for &(u, wu) in &gl {
                for &(v, wv) in &gl {
                    for &(w, ww) in &gl {
                        let y = v * (1.0 - u);
                        let z = w * (1.0 - u) * (1.0 - v);
                        r.push((vec![u, y, z], wu * wv * ww * (1.0 - u) * (1.0 - u) * (1.0 - v)));
                    }
                }
            }
            r
        }
    }
}

struct Simplex {
    /// `|det J|`, so that `int_T f = |det J| int_ref f`.
    jac: f64,
    /// Gradients of the barycentric coordinates.
    grads: Vec<DVector<f64>>,
}

fn simplex(points: &[&[f64]]) -> Result<Simplex> {
    let d = points.len() - 1;
    let j = DMatrix::from_fn(d, d, |r, c| points[c + 1][r] - points[0][r]);
    let det = j.determinant();
    let jinv_t = j
        .try_inverse()
        .ok_or_else(|| Error::InvalidMesh("degenerate element in oracle".into()))?
        .transpose();
    let mut grads = Vec::with_capacity(d + 1);
    let mut g0 = DVector::zeros(d);
    for i in 0..d {
        let gi = jinv_t.column(i).into_owned();
        g0 -= &gi;
        grads.push(gi);
    }
    grads.insert(0, g0);
    Ok(Simplex { jac: det.abs(), grads })
}

fn barycentric(xi: &[f64]) -> Vec<f64> {
    let mut l = vec![1.0 - xi.iter().sum::<f64>()];
    l.extend_from_slice(xi);
    l
}

/// Dense blocks and the solution of one backward Euler step.
#[derive(Debug, Clone)]
pub struct DenseOracle {
    pub scheme: Scheme,
    pub tau: f64,
    pub l: f64,
    pub a: DMatrix<f64>,
    pub g: DMatrix<f64>,
    pub d: DMatrix<f64>,
    pub a_p: DMatrix<f64>,
    pub m: DMatrix<f64>,
    pub m_l: DMatrix<f64>,
    pub c: DMatrix<f64>,
    pub f: DVector<f64>,
    pub g_load: DVector<f64>,
    pub fixed_u: BTreeMap<usize, f64>,
    pub fixed_p: BTreeMap<usize, f64>,
    pub solution: SolutionState,
}

/// Relative max-norm differences between the sparse system and the oracle.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct AssemblyComparison {
    pub a: f64,
    pub g: f64,
    pub d: f64,
    pub a_p: f64,
    pub m: f64,
    pub m_l: f64,
    pub c: f64,
}

impl AssemblyComparison {
    pub fn max(&self) -> f64 {
        [self.a, self.g, self.d, self.a_p, self.m, self.m_l, self.c]
            .into_iter()
            .fold(0.0, f64::max)
    }
}

fn rel(a: &DMatrix<f64>, b: &DMatrix<f64>) -> f64 {
    (a - b).amax() / b.amax().max(f64::MIN_POSITIVE)
}

impl DenseOracle {
    pub fn compare(&self, system: &DiscreteBiotSystem) -> Result<AssemblyComparison> {
        Ok(AssemblyComparison {
            a: rel(&dense(&system.a)?, &self.a),
            g: rel(&dense(&system.g)?, &self.g),
            d: rel(&dense(&system.d)?, &self.d),
            a_p: rel(&dense(&system.a_p)?, &self.a_p),
            m: rel(&dense(&system.m)?, &self.m),
            m_l: rel(&dense(&system.m_l)?, &self.m_l),
            c: rel(&dense(&system.c)?, &self.c),
        })
    }

    /// Relative differences `(u, p)` of a state against the oracle solution.
    pub fn solution_error(&self, state: &SolutionState) -> (f64, f64) {
        let diff = |a: &[f64], b: &[f64]| {
            let num = a.iter().zip(b).map(|(x, y)| (x - y) * (x - y)).sum::<f64>().sqrt();
            let den = b.iter().map(|y| y * y).sum::<f64>().sqrt();
            if den > 0.0 {
                num / den
            } else {
                num
            }
        };
        (diff(&state.u, &self.solution.u), diff(&state.p, &self.solution.p))
    }
}

/// Oracle with the small-storage default stabilization.
pub fn dense_biot_oracle(problem: &ProblemDefinition, scheme: Scheme, tau: f64) -> Result<DenseOracle> {
    let l = problem.default_stabilization(scheme)?;
    dense_biot_oracle_with(problem, scheme, tau, l)
}

/// Assembles every block by quadrature, then solves the first step from
/// `problem.initial` (or rest) densely with the boundary values eliminated.
pub fn dense_biot_oracle_with(problem: &ProblemDefinition, scheme: Scheme, tau: f64, l: f64) -> Result<DenseOracle> {
    let mesh = &problem.mesh;
    let dim = mesh.dim();
    let nv = mesh.num_vertices();
    let ne = mesh.num_elements();
    let bubbles = scheme == Scheme::Mini;
    let nu = dim * nv + if bubbles { dim * ne } else { 0 };
    let np = nv;
    if nu + np > ORACLE_DOF_LIMIT {
        return Err(Error::TooLargeForDense { rows: nu + np, cols: nu + np });
    }
    let prm = &problem.params;
    let (mu, lam, alpha, k) = (prm.mu, prm.lambda, prm.alpha, prm.conductivity);
    let rule = simplex_rule(dim, 6);
    let bscale = ((dim + 1) as f64).powi(dim as i32 + 1);

    let mut a = DMatrix::zeros(nu, nu);
    let mut g = DMatrix::zeros(nu, np);
    let mut a_p = DMatrix::zeros(np, np);
    let mut m = DMatrix::zeros(np, np);
    let mut f = DVector::zeros(nu);
    let mut gl = DVector::zeros(np);
    let prev = match &problem.initial {
        Some(s) => s.clone(),
        None => SolutionState::zeros(nu, np),
    };
    let t = prev.t + tau;
    let weight = &prm.fluid_weight[..dim];

    for e in 0..ne {
        let verts = mesh.element(e);
        let pts: Vec<&[f64]> = verts.iter().map(|&v| mesh.vertex(v)).collect();
        let s = simplex(&pts)?;
        let body: Option<Vec<Vec<f64>>> = problem
            .sources
            .body_force
            .as_ref()
            .map(|bf| pts.iter().map(|x| bf(x, t)).collect());
        let fluid: Option<Vec<f64>> = problem
            .sources
            .fluid_source
            .as_ref()
            .map(|fs| pts.iter().map(|x| fs(x, t)).collect());

        // Scalar shape functions: the d+1 vertex functions, then the bubble.
        let nshape = dim + 1 + usize::from(bubbles);
        let udof = |shape: usize, comp: usize| -> usize {
            if shape <= dim {
                dim * verts[shape] + comp
            } else {
                dim * nv + dim * e + comp
            }
        };
        for (xi, w) in &rule {
            let wq = w * s.jac;
            let lam_b = barycentric(xi);
            let mut vals = lam_b.clone();
            let mut grads: Vec<DVector<f64>> = s.grads.clone();
            if bubbles {
                vals.push(bscale * lam_b.iter().product::<f64>());
                let mut gb = DVector::zeros(dim);
                for i in 0..=dim {
                    let others: f64 = (0..=dim).filter(|&j| j != i).map(|j| lam_b[j]).product();
                    gb += &s.grads[i] * others;
                }
                grads.push(gb * bscale);
            }
            for si in 0..nshape {
                for sj in 0..nshape {
                    let dot = grads[si].dot(&grads[sj]);
                    for ca in 0..dim {
                        for cb in 0..dim {
                            // test (si, ca), trial (sj, cb)
                            let mut v = mu * grads[sj][ca] * grads[si][cb] + lam * grads[sj][cb] * grads[si][ca];
                            if ca == cb {
                                v += mu * dot;
                            }
                            a[(udof(si, ca), udof(sj, cb))] += wq * v;
                        }
                    }
                }
                for (qj, &vq) in verts.iter().enumerate() {
                    for ca in 0..dim {
                        g[(udof(si, ca), vq)] -= wq * alpha * lam_b[qj] * grads[si][ca];
                    }
                }
                if let Some(body) = &body {
                    for ca in 0..dim {
                        let interp: f64 = (0..=dim).map(|k| body[k][ca] * lam_b[k]).sum();
                        f[udof(si, ca)] += wq * interp * vals[si];
                    }
                }
            }
            for (i, &vi) in verts.iter().enumerate() {
                for (j, &vj) in verts.iter().enumerate() {
                    a_p[(vi, vj)] += wq * k * s.grads[i].dot(&s.grads[j]);
                    m[(vi, vj)] += wq * lam_b[i] * lam_b[j];
                }
                if let Some(fluid) = &fluid {
                    let interp: f64 = (0..=dim).map(|k| fluid[k] * lam_b[k]).sum();
                    gl[vi] += wq * interp * lam_b[i];
                }
                let flux: f64 = (0..dim).map(|x| weight[x] * s.grads[i][x]).sum();
                gl[vi] += wq * k * flux;
            }
        }
    }

    // Surface tractions, integrated over facets with a rule of one lower
    // dimension.
    let facet_rule = simplex_rule(dim - 1, 6);
    for tr in &problem.bcs.tractions {
        if tr.vector.len() != dim {
            return Err(Error::InvalidParameter("traction dimension".into()));
        }
        let (axis, _) = tr.side.axis(dim)?;
        for facet in mesh.boundary_facets(tr.side)? {
            if let Some(patch) = &tr.patch {
                let inside = facet.vertices.iter().all(|&v| {
                    let x = mesh.vertex(v);
                    (0..dim).all(|c| c == axis || (x[c] >= patch.lower[c] - 1e-12 && x[c] <= patch.upper[c] + 1e-12))
                });
                if !inside {
                    continue;
                }
            }
            let fp: Vec<&[f64]> = facet.vertices.iter().map(|&v| mesh.vertex(v)).collect();
            let measure = match dim {
                1 => 1.0,
                2 => ((fp[1][0] - fp[0][0]).powi(2) + (fp[1][1] - fp[0][1]).powi(2)).sqrt(),
                _ => {
                    let u = DVector::from_fn(3, |i, _| fp[1][i] - fp[0][i]);
                    let v = DVector::from_fn(3, |i, _| fp[2][i] - fp[0][i]);
                    0.5 * u.cross(&v).norm()
                }
            };
            // The rule integrates over the reference facet of volume 1/(d-1)!.
            let fact: f64 = (1..dim).map(|i| i as f64).product();
            for (xi, w) in &facet_rule {
                let lb = barycentric(xi);
                for (j, &vj) in facet.vertices.iter().enumerate() {
                    for c in 0..dim {
                        f[dim * vj + c] += w * measure * fact * lb[j] * tr.vector[c];
                    }
                }
            }
        }
    }

    for src in &problem.bcs.point_sources {
        let mut found = false;
        for e in 0..ne {
            let verts = mesh.element(e);
            let pts: Vec<&[f64]> = verts.iter().map(|&v| mesh.vertex(v)).collect();
            let jm = DMatrix::from_fn(dim, dim, |r, c| pts[c + 1][r] - pts[0][r]);
            let rhs = DVector::from_fn(dim, |r, _| src.location[r] - pts[0][r]);
            let Some(xi) = jm.lu().solve(&rhs) else { continue };
            let lb = barycentric(xi.as_slice());
            if lb.iter().all(|&x| x >= -1e-12) {
                let amp = (src.amplitude)(t);
                for (j, &vj) in verts.iter().enumerate() {
                    gl[vj] += amp * lb[j];
                }
                found = true;
                break;
            }
        }
        if !found {
            return Err(Error::SourceOutsideDomain(src.location.clone()));
        }
    }

    let d_mat = -g.transpose();
    let m_l = DMatrix::from_diagonal(&DVector::from_fn(np, |i, _| m.row(i).sum()));
    let z = &m_l - &m;
    let c = &a_p * tau + &m * prm.inv_beta + &z * l;

    let mut fixed_u = BTreeMap::new();
    for bc in &problem.bcs.displacement {
        for v in mesh.vertices_on_side(bc.side)? {
            fixed_u.insert(dim * v + bc.component, bc.value);
        }
    }
    let mut fixed_p = BTreeMap::new();
    for bc in &problem.bcs.pressure {
        for v in mesh.vertices_on_side(bc.side)? {
            fixed_p.insert(v, bc.value);
        }
    }

    let u_prev = DVector::from_column_slice(&prev.u);
    let p_prev = DVector::from_column_slice(&prev.p);
    let flow = &gl * tau + &d_mat * &u_prev + (&m * prm.inv_beta + &z * l) * &p_prev;

    let n = nu + np;
    let mut big = DMatrix::zeros(n, n);
    big.view_mut((0, 0), (nu, nu)).copy_from(&a);
    big.view_mut((0, nu), (nu, np)).copy_from(&g);
    big.view_mut((nu, 0), (np, nu)).copy_from(&d_mat);
    big.view_mut((nu, nu), (np, np)).copy_from(&c);
    let mut rhs = DVector::zeros(n);
    rhs.rows_mut(0, nu).copy_from(&f);
    rhs.rows_mut(nu, np).copy_from(&flow);

    let mut known = vec![None; n];
    for (&i, &v) in &fixed_u {
        known[i] = Some(v);
    }
    for (&i, &v) in &fixed_p {
        known[nu + i] = Some(v);
    }
    let free: Vec<usize> = (0..n).filter(|&i| known[i].is_none()).collect();
    let xc = DVector::from_fn(n, |i, _| known[i].unwrap_or(0.0));
    let reduced_rhs = &rhs - &big * &xc;
    let kff = DMatrix::from_fn(free.len(), free.len(), |i, j| big[(free[i], free[j])]);
    let bf = DVector::from_fn(free.len(), |i, _| reduced_rhs[free[i]]);
    let xf = kff.full_piv_lu().solve(&bf).ok_or(Error::Singular { pivot: 0 })?;
    let mut x = xc;
    for (i, &fi) in free.iter().enumerate() {
        x[fi] = xf[i];
    }

    Ok(DenseOracle {
        scheme,
        tau,
        l,
        a,
        g,
        d: d_mat,
        a_p,
        m,
        m_l,
        c,
        f,
        g_load: gl,
        fixed_u,
        fixed_p,
        solution: SolutionState {
            u: x.rows(0, nu).iter().cloned().collect(),
            p: x.rows(nu, np).iter().cloned().collect(),
            t: prev.t + tau,
        },
    })
}

/// Checks that a mesh is small enough for the oracle under `scheme`.
pub fn oracle_fits(mesh: &Mesh, scheme: Scheme) -> bool {
    let d = mesh.dim();
    let nu = d * mesh.num_vertices() + if scheme == Scheme::Mini { d * mesh.num_elements() } else { 0 };
    nu + mesh.num_vertices() <= ORACLE_DOF_LIMIT
}
