//! Run configuration files: flat `key = value` pairs at the top level and
//! one `[[sweep]]` section per table.
//!
//! ```toml
//! benchmark = "barry-mercer"
//! scheme = "p1p1"
//! K = 1e-10
//!
//! [[sweep]]
//! name = "by-conductivity"
//! n = [16, 32]
//! K = [1e-2, 1e-6]
//! ```

use std::path::{Path, PathBuf};

use biotstab::benchmarks::{BarryMercerSpec, Benchmark, FootingSpec, LChoice, SweepAxes, SweepSettings, TerzaghiSpec};
use biotstab::coupling::{StopKind, StopScale};
use biotstab::{optimal_parameters, CouplingMode, InnerSolver, Regime, Scheme, SolverConfig, StoppingRule};
use serde::{Deserialize, Serialize};

use crate::CliError;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum BenchmarkName {
    Terzaghi,
    BarryMercer,
    Footing3d,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum SolverKind {
    Monolithic,
    #[default]
    Coupled,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum ModeName {
    OneParameter,
    TwoParameter,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum InnerName {
    Direct,
    Cg,
}

#[derive(Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawConfig {
    benchmark: Option<BenchmarkName>,
    scheme: Option<Scheme>,
    dim: Option<usize>,
    n: Option<usize>,
    steps: Option<usize>,
    final_time: Option<f64>,
    #[serde(rename = "K")]
    k: Option<f64>,
    nu: Option<f64>,
    #[serde(rename = "E")]
    young: Option<f64>,
    /// `lambda + 2 mu` of the consolidation column.
    modulus: Option<f64>,
    alpha: Option<f64>,
    beta: Option<f64>,
    load: Option<f64>,
    stabilization: Option<bool>,
    #[serde(rename = "L")]
    l: Option<f64>,
    solver: Option<SolverKind>,
    regime: Option<Regime>,
    mode: Option<ModeName>,
    gamma: Option<f64>,
    gamma1: Option<f64>,
    gamma2: Option<f64>,
    stop: Option<StopKind>,
    stop_scale: Option<StopScale>,
    tol: Option<f64>,
    max_iterations: Option<usize>,
    inner: Option<InnerName>,
    cg_tol: Option<f64>,
    dump_matrices: Option<bool>,
    out: Option<PathBuf>,
    #[serde(default)]
    sweep: Vec<RawSweep>,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawSweep {
    name: String,
    n: Option<Vec<usize>>,
    #[serde(rename = "K")]
    k: Option<Vec<f64>>,
    nu: Option<Vec<f64>>,
    gamma: Option<Vec<f64>>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SweepTable {
    pub name: String,
    pub axes: SweepAxes,
}

/// A validated configuration with every preset filled in.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct RunConfig {
    pub benchmark: Benchmark,
    pub scheme: Scheme,
    pub solver: SolverKind,
    pub stabilized: bool,
    /// Whether `L` was given explicitly rather than taken from the preset.
    pub l_override: bool,
    pub regime: Regime,
    /// Whether the coupling mode was given explicitly.
    pub mode_override: bool,
    pub coupling: SolverConfig,
    pub sweeps: Vec<SweepTable>,
    pub dump_matrices: bool,
    pub out: Option<PathBuf>,
    /// Accepted but questionable settings.
    pub warnings: Vec<String>,
}

impl RunConfig {
    pub fn l(&self) -> f64 {
        self.coupling.l
    }

    /// Settings for [`biotstab::benchmarks::run_sweep`] derived from this run.
    pub fn sweep_settings(&self) -> SweepSettings {
        SweepSettings {
            l: if self.l_override || !self.stabilized {
                LChoice::Fixed(self.coupling.l)
            } else {
                LChoice::Preset
            },
            mode: self.mode_override.then_some(self.coupling.mode),
            regime: self.regime,
            stop: self.coupling.stop,
            max_iterations: self.coupling.max_iterations,
            inner: self.coupling.inner,
        }
    }
}

fn invalid(field: &str, msg: impl std::fmt::Display) -> CliError {
    CliError::Config(format!("invalid value for `{field}`: {msg}"))
}

fn positive(field: &str, v: Option<f64>) -> Result<Option<f64>, CliError> {
    match v {
        Some(x) if !(x > 0.0) || x.is_nan() => Err(invalid(field, format!("{x} must be positive"))),
        other => Ok(other),
    }
}

fn not_for(field: &str, given: bool, bench: &str) -> Result<(), CliError> {
    if given {
        Err(invalid(field, format!("not a parameter of the {bench} benchmark")))
    } else {
        Ok(())
    }
}

fn nonempty<T: Clone>(field: &str, v: &Option<Vec<T>>) -> Result<Option<Vec<T>>, CliError> {
    match v {
        Some(v) if v.is_empty() => Err(CliError::Usage(format!("sweep axis `{field}` is empty"))),
        other => Ok(other.clone()),
    }
}

/// Parses and validates a configuration document.
pub fn parse_config(text: &str) -> Result<RunConfig, CliError> {
    let raw: RawConfig = toml::from_str(text).map_err(|e| CliError::Config(e.to_string()))?;
    let name = raw.benchmark.ok_or_else(|| invalid("benchmark", "missing (terzaghi, barry-mercer or footing3d)"))?;
    let scheme = raw.scheme.ok_or_else(|| invalid("scheme", "missing (p1p1 or mini)"))?;

    positive("K", raw.k)?;
    positive("E", raw.young)?;
    positive("modulus", raw.modulus)?;
    positive("alpha", raw.alpha)?;
    positive("beta", raw.beta)?;
    positive("final_time", raw.final_time)?;
    if let Some(nu) = raw.nu {
        if !(nu > 0.0 && nu < 0.5) {
            return Err(invalid("nu", format!("{nu} must lie in (0, 1/2)")));
        }
    }
    if raw.n == Some(0) {
        return Err(invalid("n", "at least one cell is needed"));
    }
    if raw.steps == Some(0) {
        return Err(invalid("steps", "at least one time step is needed"));
    }
    let inv_beta = raw.beta.map(|b| if b.is_infinite() { 0.0 } else { 1.0 / b });

    let benchmark = match name {
        BenchmarkName::Terzaghi => {
            not_for("nu", raw.nu.is_some(), "terzaghi")?;
            not_for("E", raw.young.is_some(), "terzaghi")?;
            let d = TerzaghiSpec::default();
            Benchmark::Terzaghi(TerzaghiSpec {
                cells: raw.n.unwrap_or(d.cells),
                conductivity: raw.k.unwrap_or(d.conductivity),
                modulus: raw.modulus.unwrap_or(d.modulus),
                alpha: raw.alpha.unwrap_or(d.alpha),
                inv_beta: inv_beta.unwrap_or(d.inv_beta),
                load: raw.load.unwrap_or(d.load),
                final_time: raw.final_time.unwrap_or(d.final_time),
                steps: raw.steps.unwrap_or(d.steps),
                ..d
            })
        }
        BenchmarkName::BarryMercer => {
            not_for("modulus", raw.modulus.is_some(), "barry-mercer")?;
            not_for("load", raw.load.is_some(), "barry-mercer")?;
            let d = BarryMercerSpec::default();
            Benchmark::BarryMercer(BarryMercerSpec {
                cells: raw.n.unwrap_or(d.cells),
                conductivity: raw.k.unwrap_or(d.conductivity),
                poisson: raw.nu.unwrap_or(d.poisson),
                young: raw.young.unwrap_or(d.young),
                alpha: raw.alpha.unwrap_or(d.alpha),
                inv_beta: inv_beta.unwrap_or(d.inv_beta),
                final_time: raw.final_time.unwrap_or(d.final_time),
                steps: raw.steps.unwrap_or(d.steps),
                ..d
            })
        }
        BenchmarkName::Footing3d => {
            not_for("modulus", raw.modulus.is_some(), "footing3d")?;
            let d = FootingSpec::default();
            let cells = raw.n.unwrap_or(d.cells);
            if !cells.is_multiple_of(4) {
                return Err(invalid("n", format!("{cells} cells do not resolve the load patch (need a multiple of 4)")));
            }
            Benchmark::Footing3d(FootingSpec {
                cells,
                conductivity: raw.k.unwrap_or(d.conductivity),
                poisson: raw.nu.unwrap_or(d.poisson),
                young: raw.young.unwrap_or(d.young),
                alpha: raw.alpha.unwrap_or(d.alpha),
                inv_beta: inv_beta.unwrap_or(d.inv_beta),
                load: raw.load.unwrap_or(d.load),
                final_time: raw.final_time.unwrap_or(d.final_time),
                steps: raw.steps.unwrap_or(d.steps),
                ..d
            })
        }
    };
    if let Some(dim) = raw.dim {
        if dim != benchmark.dim() {
            return Err(invalid(
                "dim",
                format!("{} is posed in {}D, not {dim}D", benchmark.name(), benchmark.dim()),
            ));
        }
    }

    let problem = benchmark.problem().map_err(|e| CliError::Config(e.to_string()))?;
    let regime = raw.regime.unwrap_or(Regime::SmallStorage);
    let preset = optimal_parameters(scheme, &problem.params, problem.dim(), regime)?;
    let stabilized = raw.stabilization.unwrap_or(true);
    if !stabilized && raw.l.is_some_and(|l| l != 0.0) {
        return Err(invalid("L", "a nonzero value contradicts `stabilization = false`"));
    }
    if let Some(l) = raw.l {
        if !(l >= 0.0) || !l.is_finite() {
            return Err(invalid("L", format!("{l} must be finite and nonnegative")));
        }
    }
    let l = match (stabilized, raw.l) {
        (false, _) => 0.0,
        (true, Some(l)) => l,
        (true, None) => preset.l,
    };

    let mut warnings = Vec::new();
    let mode = match (raw.mode, raw.gamma, raw.gamma1, raw.gamma2) {
        (Some(ModeName::TwoParameter), Some(_), _, _) => {
            return Err(invalid("gamma", "use gamma1 and gamma2 with the two-parameter mode"))
        }
        (_, Some(_), Some(_), _) | (_, Some(_), _, Some(_)) => {
            return Err(invalid("gamma", "give either gamma or gamma1/gamma2, not both"))
        }
        (Some(ModeName::OneParameter), None, Some(_), _) | (Some(ModeName::OneParameter), None, _, Some(_)) => {
            return Err(invalid("gamma1", "the one-parameter mode takes `gamma`"))
        }
        (_, Some(gamma), None, None) => Some(CouplingMode::OneParameter { gamma }),
        (_, None, Some(gamma1), Some(gamma2)) => Some(CouplingMode::TwoParameter { gamma1, gamma2 }),
        (_, None, Some(_), None) => return Err(invalid("gamma2", "missing while gamma1 is set")),
        (_, None, None, Some(_)) => return Err(invalid("gamma1", "missing while gamma2 is set")),
        (Some(ModeName::OneParameter), None, None, None) => Some(match preset.mode {
            m @ CouplingMode::OneParameter { .. } => m,
            CouplingMode::TwoParameter { gamma1, .. } => CouplingMode::OneParameter { gamma: gamma1 },
        }),
        (Some(ModeName::TwoParameter), None, None, None) => {
            let general = optimal_parameters(scheme, &problem.params, problem.dim(), Regime::General)?;
            Some(general.mode)
        }
        (None, None, None, None) => None,
    };
    let mode_override = mode.is_some();
    let mode = mode.unwrap_or(preset.mode);
    let (g1, g2) = mode.gammas();
    for (field, v) in [("gamma", g1), ("gamma2", g2)] {
        if !(v >= 0.0) || !v.is_finite() {
            return Err(invalid(field, format!("{v} must be finite and nonnegative")));
        }
    }
    if g1 <= 0.5 || g1 > 2.0 {
        warnings.push(format!(
            "gamma = {g1} lies outside (1/2, 2], where convergence is guaranteed"
        ));
    }

    let default_stop = benchmark.default_stop();
    let tol = raw.tol.unwrap_or(default_stop.tol);
    if !(tol > 0.0) {
        return Err(invalid("tol", format!("{tol} must be positive")));
    }
    let stop = StoppingRule {
        kind: raw.stop.unwrap_or(default_stop.kind),
        scale: raw.stop_scale.unwrap_or(default_stop.scale),
        tol,
    };
    let max_iterations = raw.max_iterations.unwrap_or(200);
    if max_iterations == 0 {
        return Err(invalid("max_iterations", "must be at least 1"));
    }
    let inner = match raw.inner.unwrap_or(InnerName::Direct) {
        InnerName::Direct => {
            if raw.cg_tol.is_some() {
                return Err(invalid("cg_tol", "only used with `inner = \"cg\"`"));
            }
            InnerSolver::Direct
        }
        InnerName::Cg => match (InnerSolver::cg(), positive("cg_tol", raw.cg_tol)?) {
            (InnerSolver::Cg { max_it, .. }, Some(tol)) => InnerSolver::Cg { tol, max_it },
            (cg, _) => cg,
        },
    };
    let coupling = SolverConfig::new(scheme, l, mode)
        .with_stop(stop)
        .with_max_iterations(max_iterations)
        .with_inner(inner);

    let mut sweeps = Vec::new();
    for s in &raw.sweep {
        if s.name.is_empty() || !s.name.chars().all(|c| c.is_ascii_alphanumeric() || c == '-' || c == '_') {
            return Err(invalid("sweep.name", format!("'{}' must be a nonempty [A-Za-z0-9_-] file stem", s.name)));
        }
        if sweeps.iter().any(|t: &SweepTable| t.name == s.name) {
            return Err(invalid("sweep.name", format!("'{}' appears twice", s.name)));
        }
        if s.nu.is_some() && benchmark.poisson().is_none() {
            return Err(invalid("sweep.nu", "the benchmark has no Poisson ratio"));
        }
        sweeps.push(SweepTable {
            name: s.name.clone(),
            axes: SweepAxes {
                cells: nonempty("n", &s.n)?,
                conductivity: nonempty("K", &s.k)?,
                poisson: nonempty("nu", &s.nu)?,
                gamma: nonempty("gamma", &s.gamma)?,
            },
        });
    }

    Ok(RunConfig {
        benchmark,
        scheme,
        solver: raw.solver.unwrap_or_default(),
        stabilized,
        l_override: raw.l.is_some(),
        regime,
        mode_override,
        coupling,
        sweeps,
        dump_matrices: raw.dump_matrices.unwrap_or(false),
        out: raw.out,
        warnings,
    })
}

pub fn load_config(path: &Path) -> Result<RunConfig, CliError> {
    let text = std::fs::read_to_string(path)
        .map_err(|e| CliError::Usage(format!("cannot read config {}: {e}", path.display())))?;
    parse_config(&text).map_err(|e| match e {
        CliError::Config(msg) => CliError::Config(format!("{}: {msg}", path.display())),
        other => other,
    })
}
