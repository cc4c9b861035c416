use serde::{Deserialize, Serialize};

use crate::assembly::{BoundaryConditions, Patch};
use crate::biot::{MaterialParams, ProblemDefinition};
use crate::error::{Error, Result};
use crate::mesh::{Mesh, Side};

/// One-dimensional consolidation of a column loaded and drained at `x = 0`
/// and fixed and sealed at `x = H`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct TerzaghiSpec {
    pub height: f64,
    pub load: f64,
    /// `lambda + 2 mu`; the column is modelled with `lambda = 0`.
    pub modulus: f64,
    pub alpha: f64,
    pub inv_beta: f64,
    pub conductivity: f64,
    pub final_time: f64,
    pub steps: usize,
    pub cells: usize,
}

impl Default for TerzaghiSpec {
    fn default() -> Self {
        TerzaghiSpec {
            height: 1.0,
            load: 1.0,
            modulus: 1.0,
            alpha: 1.0,
            inv_beta: 0.0,
            conductivity: 1e-6,
            final_time: 0.1,
            steps: 1,
            cells: 32,
        }
    }
}

impl TerzaghiSpec {
    pub fn params(&self) -> Result<MaterialParams> {
        MaterialParams::from_lame(self.modulus / 2.0, 0.0, self.alpha, self.inv_beta, self.conductivity)
    }
}

pub fn terzaghi_problem(spec: &TerzaghiSpec) -> Result<ProblemDefinition> {
    if !(spec.height > 0.0) || !(spec.load >= 0.0) || !(spec.conductivity > 0.0) {
        return Err(Error::InvalidParameter(format!(
            "column height, load and conductivity must be positive (got {}, {}, {})",
            spec.height, spec.load, spec.conductivity
        )));
    }
    let mesh = Mesh::build(1, spec.cells, &[spec.height])?;
    let bcs = BoundaryConditions::default()
        .traction(Side::Left, vec![spec.load], None)
        .fix_pressure(Side::Left, 0.0)
        .fix_displacement(Side::Right, 0, 0.0);
    Ok(ProblemDefinition::new(mesh, spec.params()?, bcs, spec.final_time, spec.steps))
}

/// Series solution of the consolidation problem with consolidation
/// coefficient `c_v = K (lambda + 2 mu)`, truncated after `n_terms` odd modes.
pub fn terzaghi_analytic(x: f64, t: f64, spec: &TerzaghiSpec, n_terms: usize) -> f64 {
    let h = spec.height;
    let cv = spec.conductivity * spec.modulus;
    let pi = std::f64::consts::PI;
    let sum: f64 = (0..n_terms.max(1))
        .map(|j| {
            let k = (2 * j + 1) as f64;
            (k * pi * x / (2.0 * h)).sin() / k * (-(k * k) * pi * pi * cv * t / (4.0 * h * h)).exp()
        })
        .sum();
    4.0 * spec.load / pi * sum
}

/// Square domain with a pulsating point source, drained on all sides and
/// with vanishing tangential displacement.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct BarryMercerSpec {
    pub width: f64,
    pub height: f64,
    pub source: [f64; 2],
    pub young: f64,
    pub poisson: f64,
    pub alpha: f64,
    pub inv_beta: f64,
    pub conductivity: f64,
    pub final_time: f64,
    pub steps: usize,
    pub cells: usize,
    /// Leave the normal displacement free (zero normal traction); otherwise
    /// it is fixed to zero as well.
    pub normal_free: bool,
}

impl Default for BarryMercerSpec {
    fn default() -> Self {
        BarryMercerSpec {
            width: 1.0,
            height: 1.0,
            source: [0.25, 0.25],
            young: 1e5,
            poisson: 0.4,
            alpha: 1.0,
            inv_beta: 1e-8,
            conductivity: 1e-6,
            final_time: 1e-4,
            steps: 1,
            cells: 16,
            normal_free: true,
        }
    }
}

impl BarryMercerSpec {
    pub fn params(&self) -> Result<MaterialParams> {
        MaterialParams::from_young(self.young, self.poisson, self.alpha, self.inv_beta, self.conductivity)
    }

    /// Source frequency `(lambda + 2 mu) K / (a b)`.
    pub fn frequency(&self) -> Result<f64> {
        let p = self.params()?;
        Ok((p.lambda + 2.0 * p.mu) * p.conductivity / (self.width * self.height))
    }
}

pub fn barry_mercer_problem(spec: &BarryMercerSpec) -> Result<ProblemDefinition> {
    let [x0, y0] = spec.source;
    if !(x0 > 0.0 && x0 < spec.width && y0 > 0.0 && y0 < spec.height) {
        return Err(Error::InvalidParameter(format!(
            "source {:?} must lie strictly inside the domain",
            spec.source
        )));
    }
    let mesh = Mesh::build(2, spec.cells, &[spec.width, spec.height])?;
    let ups = spec.frequency()?;
    let mut bcs = BoundaryConditions::default()
        .fix_displacement(Side::Left, 1, 0.0)
        .fix_displacement(Side::Right, 1, 0.0)
        .fix_displacement(Side::Bottom, 0, 0.0)
        .fix_displacement(Side::Top, 0, 0.0)
        .point_source(vec![x0, y0], move |t| 2.0 * ups * (ups * t).sin());
    if !spec.normal_free {
        bcs = bcs
            .fix_displacement(Side::Left, 0, 0.0)
            .fix_displacement(Side::Right, 0, 0.0)
            .fix_displacement(Side::Bottom, 1, 0.0)
            .fix_displacement(Side::Top, 1, 0.0);
    }
    for side in Side::all(2) {
        bcs = bcs.fix_pressure(*side, 0.0);
    }
    Ok(ProblemDefinition::new(mesh, spec.params()?, bcs, spec.final_time, spec.steps))
}

/// Unit cube with a fixed base and a uniform downward load on the centred
/// half-width square of the top face.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct FootingSpec {
    pub load: f64,
    pub young: f64,
    pub poisson: f64,
    pub alpha: f64,
    pub inv_beta: f64,
    pub conductivity: f64,
    pub final_time: f64,
    pub steps: usize,
    pub cells: usize,
    /// Drain the base as well; by default it is sealed.
    pub base_drained: bool,
}

impl Default for FootingSpec {
    fn default() -> Self {
        FootingSpec {
            load: 1e4,
            young: 1e4,
            poisson: 0.4,
            alpha: 1.0,
            inv_beta: 1e-6,
            conductivity: 1e-6,
            final_time: 1e-2,
            steps: 1,
            cells: 8,
            base_drained: false,
        }
    }
}

impl FootingSpec {
    pub fn params(&self) -> Result<MaterialParams> {
        MaterialParams::from_young(self.young, self.poisson, self.alpha, self.inv_beta, self.conductivity)
    }
}

pub fn footing3d_problem(spec: &FootingSpec) -> Result<ProblemDefinition> {
    if !spec.cells.is_multiple_of(4) {
        return Err(Error::PatchMisaligned(format!(
            "{} cells per axis do not resolve the load patch edges at 1/4 and 3/4",
            spec.cells
        )));
    }
    let mesh = Mesh::build(3, spec.cells, &[1.0, 1.0, 1.0])?;
    let patch = Patch {
        lower: vec![0.25, 0.25, 1.0],
        upper: vec![0.75, 0.75, 1.0],
    };
    let mut bcs = BoundaryConditions::default()
        .clamp(Side::Bottom, 3)
        .traction(Side::Top, vec![0.0, 0.0, -spec.load], Some(patch));
    for side in [Side::Left, Side::Right, Side::Front, Side::Back, Side::Top] {
        bcs = bcs.fix_pressure(side, 0.0);
    }
    if spec.base_drained {
        bcs = bcs.fix_pressure(Side::Bottom, 0.0);
    }
    Ok(ProblemDefinition::new(mesh, spec.params()?, bcs, spec.final_time, spec.steps))
}
