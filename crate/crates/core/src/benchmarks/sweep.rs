use std::io::{Read, Write};

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::problems::{
    barry_mercer_problem, footing3d_problem, terzaghi_problem, BarryMercerSpec, FootingSpec,
    TerzaghiSpec,
};
use crate::assembly::Scheme;
use crate::biot::{run_transient, ProblemDefinition, Regime, SolverChoice};
use crate::coupling::{optimal_parameters, CouplingMode, SolverConfig, StopReason, StoppingRule};
use crate::error::{Error, Result};
use crate::linalg::InnerSolver;

/// Schema tag written as the first line of every sweep CSV.
pub const SWEEP_CSV_HEADER: &str = "# biotstab sweep v1";
/// Schema tag written as the first line of every profile CSV.
pub const PROFILE_CSV_HEADER: &str = "# biotstab profile v1";

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "benchmark", rename_all = "kebab-case")]
pub enum Benchmark {
    Terzaghi(TerzaghiSpec),
    BarryMercer(BarryMercerSpec),
    Footing3d(FootingSpec),
}

impl Benchmark {
    pub fn name(&self) -> &'static str {
        match self {
            Benchmark::Terzaghi(_) => "terzaghi",
            Benchmark::BarryMercer(_) => "barry-mercer",
            Benchmark::Footing3d(_) => "footing3d",
        }
    }

    pub fn dim(&self) -> usize {
        match self {
            Benchmark::Terzaghi(_) => 1,
            Benchmark::BarryMercer(_) => 2,
            Benchmark::Footing3d(_) => 3,
        }
    }

    pub fn problem(&self) -> Result<ProblemDefinition> {
        match self {
            Benchmark::Terzaghi(s) => terzaghi_problem(s),
            Benchmark::BarryMercer(s) => barry_mercer_problem(s),
            Benchmark::Footing3d(s) => footing3d_problem(s),
        }
    }

    pub fn cells(&self) -> usize {
        match self {
            Benchmark::Terzaghi(s) => s.cells,
            Benchmark::BarryMercer(s) => s.cells,
            Benchmark::Footing3d(s) => s.cells,
        }
    }

    /// Mesh size along the first axis.
    pub fn h(&self) -> f64 {
        let extent = match self {
            Benchmark::Terzaghi(s) => s.height,
            Benchmark::BarryMercer(s) => s.width,
            Benchmark::Footing3d(_) => 1.0,
        };
        extent / self.cells() as f64
    }

    pub fn conductivity(&self) -> f64 {
        match self {
            Benchmark::Terzaghi(s) => s.conductivity,
            Benchmark::BarryMercer(s) => s.conductivity,
            Benchmark::Footing3d(s) => s.conductivity,
        }
    }

    pub fn poisson(&self) -> Option<f64> {
        match self {
            Benchmark::Terzaghi(_) => None,
            Benchmark::BarryMercer(s) => Some(s.poisson),
            Benchmark::Footing3d(s) => Some(s.poisson),
        }
    }

    pub fn with_cells(mut self, n: usize) -> Self {
        match &mut self {
            Benchmark::Terzaghi(s) => s.cells = n,
            Benchmark::BarryMercer(s) => s.cells = n,
            Benchmark::Footing3d(s) => s.cells = n,
        }
        self
    }

    pub fn with_conductivity(mut self, k: f64) -> Self {
        match &mut self {
            Benchmark::Terzaghi(s) => s.conductivity = k,
            Benchmark::BarryMercer(s) => s.conductivity = k,
            Benchmark::Footing3d(s) => s.conductivity = k,
        }
        self
    }

    pub fn with_poisson(mut self, nu: f64) -> Result<Self> {
        match &mut self {
            Benchmark::Terzaghi(_) => {
                return Err(Error::InvalidParameter(
                    "the consolidation column is parametrised by its modulus, not a Poisson ratio".into(),
                ))
            }
            Benchmark::BarryMercer(s) => s.poisson = nu,
            Benchmark::Footing3d(s) => s.poisson = nu,
        }
        Ok(self)
    }

    /// Absolute residual for the column; for the 2D and 3D problems the
    /// increment relative to the current iterate, since the source and load
    /// magnitudes vary over many orders with `K`.
    pub fn default_stop(&self) -> StoppingRule {
        match self {
            Benchmark::Terzaghi(_) => StoppingRule::residual(1e-8),
            _ => StoppingRule::increment(1e-8).relative(),
        }
    }
}

/// Values swept along each axis. `None` keeps the benchmark value (or, for
/// `gamma`, the preset); an explicitly empty axis is rejected.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SweepAxes {
    pub cells: Option<Vec<usize>>,
    pub conductivity: Option<Vec<f64>>,
    pub poisson: Option<Vec<f64>>,
    pub gamma: Option<Vec<f64>>,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum LChoice {
    /// Preset value from the material parameters of each cell.
    Preset,
    Fixed(f64),
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SweepSettings {
    pub l: LChoice,
    /// Coupling mode when no `gamma` axis is given; `None` uses the preset.
    pub mode: Option<CouplingMode>,
    pub regime: Regime,
    pub stop: StoppingRule,
    pub max_iterations: usize,
    pub inner: InnerSolver,
}

impl SweepSettings {
    pub fn for_benchmark(b: &Benchmark) -> Self {
        SweepSettings {
            l: LChoice::Preset,
            mode: None,
            regime: Regime::SmallStorage,
            stop: b.default_stop(),
            max_iterations: 200,
            inner: InnerSolver::Direct,
        }
    }
}

/// One sweep cell, also the CSV row schema.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SweepCell {
    pub benchmark: String,
    pub scheme: String,
    pub h: f64,
    #[serde(rename = "K")]
    pub k: f64,
    pub nu: Option<f64>,
    pub gamma: Option<f64>,
    pub gamma1: f64,
    pub gamma2: f64,
    #[serde(rename = "L")]
    pub l: f64,
    pub iterations: usize,
    pub converged: bool,
    /// `converged`, `diverged`, `non-finite`, `max-iterations` or `error: ...`.
    pub status: String,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SweepResult {
    pub benchmark: String,
    pub scheme: Scheme,
    pub cells_axis: Vec<usize>,
    pub conductivity_axis: Vec<f64>,
    pub poisson_axis: Vec<Option<f64>>,
    pub gamma_axis: Vec<Option<f64>>,
    /// Row-major over (conductivity, poisson, gamma, cells).
    pub cells: Vec<SweepCell>,
}

impl SweepResult {
    /// Cell at the given axis values (compared exactly).
    pub fn get(&self, cells: usize, k: f64, nu: Option<f64>, gamma: Option<f64>) -> Option<&SweepCell> {
        let ic = self.cells_axis.iter().position(|&c| c == cells)?;
        let ik = self.conductivity_axis.iter().position(|&x| x == k)?;
        let inu = self.poisson_axis.iter().position(|&x| x == nu)?;
        let ig = self.gamma_axis.iter().position(|&x| x == gamma)?;
        let idx = ((ik * self.poisson_axis.len() + inu) * self.gamma_axis.len() + ig) * self.cells_axis.len() + ic;
        self.cells.get(idx)
    }

    /// No cell converged.
    pub fn all_failed(&self) -> bool {
        self.cells.iter().all(|c| !c.converged)
    }

    pub fn write_csv<W: Write>(&self, mut w: W) -> Result<()> {
        writeln!(w, "{SWEEP_CSV_HEADER}")?;
        let mut wr = csv::Writer::from_writer(w);
        for c in &self.cells {
            wr.serialize(c)?;
        }
        wr.flush()?;
        Ok(())
    }
}

/// Parses a sweep CSV written by [`SweepResult::write_csv`].
pub fn read_sweep_csv<R: Read>(r: R) -> Result<Vec<SweepCell>> {
    let mut rd = csv::ReaderBuilder::new().comment(Some(b'#')).from_reader(r);
    rd.deserialize().map(|row| row.map_err(Error::from)).collect()
}

fn axis<T: Clone>(name: &str, values: &Option<Vec<T>>, default: T) -> Result<Vec<T>> {
    match values {
        None => Ok(vec![default]),
        Some(v) if v.is_empty() => Err(Error::InvalidParameter(format!("sweep axis '{name}' is empty"))),
        Some(v) => Ok(v.clone()),
    }
}

fn run_cell(
    bench: Benchmark,
    scheme: Scheme,
    gamma: Option<f64>,
    settings: &SweepSettings,
) -> SweepCell {
    let mut cell = SweepCell {
        benchmark: bench.name().to_string(),
        scheme: scheme.name().to_string(),
        h: bench.h(),
        k: bench.conductivity(),
        nu: bench.poisson(),
        gamma,
        gamma1: f64::NAN,
        gamma2: f64::NAN,
        l: f64::NAN,
        iterations: 0,
        converged: false,
        status: String::new(),
    };
    let outcome = (|| -> Result<()> {
        let problem = bench.problem()?;
        let preset = optimal_parameters(scheme, &problem.params, problem.dim(), settings.regime)?;
        let l = match settings.l {
            LChoice::Preset => preset.l,
            LChoice::Fixed(l) => l,
        };
        let mode = match (gamma, settings.mode) {
            (Some(g), _) => CouplingMode::OneParameter { gamma: g },
            (None, Some(m)) => m,
            (None, None) => preset.mode,
        };
        let (g1, g2) = mode.gammas();
        cell.l = l;
        cell.gamma1 = g1;
        cell.gamma2 = g2;
        if let CouplingMode::OneParameter { gamma } = mode {
            cell.gamma = Some(gamma);
        }
        let config = SolverConfig::new(scheme, l, mode)
            .with_stop(settings.stop)
            .with_max_iterations(settings.max_iterations)
            .with_inner(settings.inner);
        let traj = run_transient(&problem, scheme, &SolverChoice::Coupled(config))?;
        cell.iterations = traj.reports.iter().map(|r| r.iterations).max().unwrap_or(0);
        cell.converged = traj.reports.iter().all(|r| r.converged);
        let reason = traj
            .reports
            .iter()
            .map(|r| r.reason)
            .find(|&r| r != StopReason::Converged)
            .unwrap_or(StopReason::Converged);
        cell.status = match reason {
            StopReason::Converged => "converged",
            StopReason::Diverged => "diverged",
            StopReason::NonFinite => "non-finite",
            StopReason::MaxIterations => "max-iterations",
        }
        .to_string();
        Ok(())
    })();
    if let Err(e) = outcome {
        cell.status = format!("error: {e}");
    }
    cell
}

/// Runs the coupled solver at every grid point. Failures are recorded in
/// the cell status and never abort the sweep.
pub fn run_sweep(benchmark: &Benchmark, scheme: Scheme, axes: &SweepAxes, settings: &SweepSettings) -> Result<SweepResult> {
    let cells_axis = axis("cells", &axes.cells, benchmark.cells())?;
    let conductivity_axis = axis("conductivity", &axes.conductivity, benchmark.conductivity())?;
    let poisson_axis: Vec<Option<f64>> = match &axes.poisson {
        None => vec![benchmark.poisson()],
        Some(_) => axis("poisson", &axes.poisson, 0.0)?.into_iter().map(Some).collect(),
    };
    let gamma_axis: Vec<Option<f64>> = match &axes.gamma {
        None => vec![None],
        Some(_) => axis("gamma", &axes.gamma, 0.0)?.into_iter().map(Some).collect(),
    };

    let mut jobs = Vec::new();
    for &k in &conductivity_axis {
        for &nu in &poisson_axis {
            for &gamma in &gamma_axis {
                for &n in &cells_axis {
                    let mut b = benchmark.with_cells(n).with_conductivity(k);
                    if let Some(nu) = nu {
                        b = b.with_poisson(nu)?;
                    }
                    jobs.push((b, gamma));
                }
            }
        }
    }
    let cells: Vec<SweepCell> = jobs
        .into_par_iter()
        .map(|(b, gamma)| run_cell(b, scheme, gamma, settings))
        .collect();
    Ok(SweepResult {
        benchmark: benchmark.name().to_string(),
        scheme,
        cells_axis,
        conductivity_axis,
        poisson_axis,
        gamma_axis,
        cells,
    })
}

/// Writes a pressure profile as `x, p_numeric, p_analytic`.
pub fn write_profile_csv<W: Write>(mut w: W, x: &[f64], numeric: &[f64], analytic: Option<&[f64]>) -> Result<()> {
    writeln!(w, "{PROFILE_CSV_HEADER}")?;
    let mut wr = csv::Writer::from_writer(w);
    wr.write_record(["x", "p_numeric", "p_analytic"])?;
    for i in 0..x.len() {
        let a = analytic.map(|a| format!("{:e}", a[i])).unwrap_or_default();
        wr.write_record([format!("{:e}", x[i]), format!("{:e}", numeric[i]), a])?;
    }
    wr.flush()?;
    Ok(())
}
