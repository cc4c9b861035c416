use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::mesh::Mesh;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct OscillationReport {
    pub min: f64,
    pub max: f64,
    pub tolerance: f64,
    /// Some value lies below `-tolerance`.
    pub undershoot: bool,
    /// Successive differences never reverse direction by more than the
    /// tolerance.
    pub monotone: bool,
    /// At most one reversal, from rising to falling (a single peak).
    pub unimodal: bool,
    /// Direction reversals beyond the tolerance.
    pub reversals: usize,
}

impl OscillationReport {
    /// No undershoot and a profile that is monotone, or unimodal when
    /// `allow_peak` is set.
    pub fn oscillation_free(&self, allow_peak: bool) -> bool {
        !self.undershoot && (self.monotone || (allow_peak && self.unimodal))
    }
}

/// Inspects nodal values ordered along a line.
pub fn check_monotone(values: &[f64], tolerance: f64) -> OscillationReport {
    let min = values.iter().cloned().fold(f64::INFINITY, f64::min);
    let max = values.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
    // Directions of the significant steps only.
    let dirs: Vec<i8> = values
        .windows(2)
        .filter_map(|w| {
            let d = w[1] - w[0];
            if d > tolerance {
                Some(1)
            } else if d < -tolerance {
                Some(-1)
            } else {
                None
            }
        })
        .collect();
    let reversals = dirs.windows(2).filter(|w| w[0] != w[1]).count();
    let first_drop_then_rise = dirs.windows(2).any(|w| w[0] == -1 && w[1] == 1);
    OscillationReport {
        min: if values.is_empty() { 0.0 } else { min },
        max: if values.is_empty() { 0.0 } else { max },
        tolerance,
        undershoot: values.iter().any(|&v| v < -tolerance),
        monotone: reversals == 0,
        unimodal: reversals <= 1 && !first_drop_then_rise,
        reversals,
    }
}

/// Vertex values on the mesh line parallel to `axis` through `point`,
/// sorted by the coordinate along the line.
pub fn scan_line(mesh: &Mesh, field: &[f64], axis: usize, point: &[f64]) -> Result<Vec<(f64, f64)>> {
    let d = mesh.dim();
    if axis >= d || point.len() != d {
        return Err(Error::InvalidParameter(format!("scan line along axis {axis} through {point:?} in {d}D")));
    }
    if field.len() != mesh.num_vertices() {
        return Err(Error::DimensionMismatch("field is not a vertex field".into()));
    }
    let tol = 1e-9 * mesh.h();
    let mut line: Vec<(f64, f64)> = (0..mesh.num_vertices())
        .filter(|&v| {
            let x = mesh.vertex(v);
            (0..d).all(|a| a == axis || (x[a] - point[a]).abs() <= tol)
        })
        .map(|v| (mesh.vertex(v)[axis], field[v]))
        .collect();
    if line.is_empty() {
        return Err(Error::InvalidParameter(format!("no mesh line through {point:?}")));
    }
    line.sort_by(|a, b| a.0.total_cmp(&b.0));
    Ok(line)
}
