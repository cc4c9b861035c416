use std::fs::{self, File};
use std::io::{BufWriter, Write};
use std::path::{Path, PathBuf};

use biotstab::benchmarks::{run_sweep, terzaghi_analytic, write_profile_csv, Benchmark, SweepResult};
use biotstab::coupling::StopReason;
use biotstab::verify::{run_suite, scan_line, Suite, VerifyReport};
use biotstab::{build_stabilized_system, run_transient, IterationReport, Mesh, SolutionState, SolverChoice};
use serde::Serialize;

use crate::config::{RunConfig, SolverKind};
use crate::{CliError, EXIT_FAILED, EXIT_OK};

pub const DISPLACEMENT_CSV_HEADER: &str = "# biotstab displacement v1";
pub const RUN_REPORT_SCHEMA: &str = "biotstab run report v1";

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum RunStatus {
    /// Monolithic solve, no iteration involved.
    Solved,
    Converged,
    Diverged,
    NotConverged,
}

#[derive(Debug, Serialize)]
pub struct RunReport<'a> {
    pub schema: &'static str,
    pub status: RunStatus,
    pub steps_completed: usize,
    pub final_time: f64,
    pub omega: f64,
    pub config: &'a RunConfig,
    pub iterations: Vec<IterationReport>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct RunOutcome {
    pub status: RunStatus,
    pub out: PathBuf,
    pub files: Vec<PathBuf>,
}

impl RunOutcome {
    pub fn exit_code(&self) -> i32 {
        match self.status {
            RunStatus::Solved | RunStatus::Converged => EXIT_OK,
            RunStatus::Diverged | RunStatus::NotConverged => EXIT_FAILED,
        }
    }
}

fn prepare_dir(dir: &Path) -> Result<(), CliError> {
    fs::create_dir_all(dir).map_err(|e| CliError::io(format!("cannot create output directory {}", dir.display()), e))
}

fn create(path: &Path) -> Result<BufWriter<File>, CliError> {
    File::create(path)
        .map(BufWriter::new)
        .map_err(|e| CliError::io(format!("cannot create {}", path.display()), e))
}

fn finish(mut w: BufWriter<File>, path: &Path) -> Result<(), CliError> {
    w.flush().map_err(|e| CliError::io(format!("cannot write {}", path.display()), e))
}

/// Axis and anchor point of the line on which profiles are reported.
fn profile_line(benchmark: &Benchmark) -> (usize, Vec<f64>) {
    match benchmark {
        Benchmark::Terzaghi(_) => (0, vec![0.0]),
        Benchmark::BarryMercer(s) => (0, s.source.to_vec()),
        Benchmark::Footing3d(_) => (2, vec![0.5, 0.5, 0.0]),
    }
}

fn write_profiles(
    config: &RunConfig,
    mesh: &Mesh,
    state: &SolutionState,
    dir: &Path,
    files: &mut Vec<PathBuf>,
) -> Result<(), CliError> {
    let (axis, point) = profile_line(&config.benchmark);
    let line = scan_line(mesh, &state.p, axis, &point)?;
    let x: Vec<f64> = line.iter().map(|q| q.0).collect();
    let p: Vec<f64> = line.iter().map(|q| q.1).collect();
    let analytic = match &config.benchmark {
        Benchmark::Terzaghi(spec) => Some(x.iter().map(|&xi| terzaghi_analytic(xi, state.t, spec, 2001)).collect::<Vec<_>>()),
        _ => None,
    };
    let path = dir.join("profile.csv");
    let mut w = create(&path)?;
    write_profile_csv(&mut w, &x, &p, analytic.as_deref())?;
    finish(w, &path)?;
    files.push(path);

    // Vertex dofs come first and are vertex-major, whichever scheme is used.
    let d = mesh.dim();
    let comps: Vec<Vec<(f64, f64)>> = (0..d)
        .map(|a| {
            let field: Vec<f64> = (0..mesh.num_vertices()).map(|v| state.u[d * v + a]).collect();
            scan_line(mesh, &field, axis, &point)
        })
        .collect::<Result<_, _>>()?;
    let path = dir.join("displacement.csv");
    let mut w = create(&path)?;
    let io = |e| CliError::io(format!("cannot write {}", path.display()), e);
    writeln!(w, "{DISPLACEMENT_CSV_HEADER}").map_err(io)?;
    let names: Vec<String> = (0..d).map(|a| format!("u{a}")).collect();
    writeln!(w, "x,{}", names.join(",")).map_err(io)?;
    for (i, xi) in x.iter().enumerate() {
        let vals: Vec<String> = comps.iter().map(|c| format!("{:e}", c[i].1)).collect();
        writeln!(w, "{xi:e},{}", vals.join(",")).map_err(io)?;
    }
    finish(w, &path)?;
    files.push(path);
    Ok(())
}

/// Solves the configured benchmark and writes `profile.csv`,
/// `displacement.csv` and `report.json` (plus MatrixMarket dumps on request)
/// into `out`.
pub fn cmd_run(config: &RunConfig, out: &Path) -> Result<RunOutcome, CliError> {
    prepare_dir(out)?;
    let problem = config.benchmark.problem()?;
    let choice = match config.solver {
        SolverKind::Monolithic => SolverChoice::Monolithic { l: config.l() },
        SolverKind::Coupled => {
            config.coupling.validate()?;
            SolverChoice::Coupled(config.coupling)
        }
    };
    log::info!(
        "{} with {} on n = {}, L = {:e}, {:?}",
        config.benchmark.name(),
        config.scheme.name(),
        config.benchmark.cells(),
        config.l(),
        config.coupling.mode
    );
    let traj = run_transient(&problem, config.scheme, &choice)?;
    let mut files = Vec::new();
    write_profiles(config, &problem.mesh, traj.last(), out, &mut files)?;

    let status = match config.solver {
        SolverKind::Monolithic => RunStatus::Solved,
        SolverKind::Coupled => match traj.reports.last().map(|r| r.reason) {
            _ if traj.diverged() => RunStatus::Diverged,
            Some(StopReason::Diverged) | Some(StopReason::NonFinite) => RunStatus::Diverged,
            Some(StopReason::MaxIterations) => RunStatus::NotConverged,
            _ if traj.reports.len() < problem.steps => RunStatus::NotConverged,
            _ => RunStatus::Converged,
        },
    };
    for (n, r) in traj.reports.iter().enumerate() {
        log::info!("step {}: {} iterations, {:?}", n + 1, r.iterations, r.reason);
    }
    let report = RunReport {
        schema: RUN_REPORT_SCHEMA,
        status,
        steps_completed: traj.states.len(),
        final_time: traj.last().t,
        omega: config.coupling.omega(&problem.params, problem.dim()),
        config,
        iterations: traj.reports.clone(),
    };
    let path = out.join("report.json");
    let mut w = create(&path)?;
    serde_json::to_writer_pretty(&mut w, &report)
        .map_err(|e| CliError::io(format!("cannot write {}", path.display()), e.into()))?;
    writeln!(w).map_err(|e| CliError::io(format!("cannot write {}", path.display()), e))?;
    finish(w, &path)?;
    files.push(path);

    if config.dump_matrices {
        let system = build_stabilized_system(&problem, config.scheme, problem.tau(), Some(config.l()))?;
        let blocks = [
            ("A", &system.a),
            ("G", &system.g),
            ("D", &system.d),
            ("Ap", &system.a_p),
            ("M", &system.m),
            ("Ml", &system.m_l),
            ("Z", &system.z),
            ("C", &system.c),
        ];
        for (name, m) in blocks {
            let path = out.join(format!("{name}.mtx"));
            let mut w = create(&path)?;
            m.write_matrix_market(&mut w)?;
            finish(w, &path)?;
            files.push(path);
        }
    }
    Ok(RunOutcome {
        status,
        out: out.to_path_buf(),
        files,
    })
}

/// Runs every `[[sweep]]` table and writes `<name>.csv` for each.
pub fn cmd_sweep(config: &RunConfig, out: &Path) -> Result<Vec<(PathBuf, SweepResult)>, CliError> {
    if config.sweeps.is_empty() {
        return Err(CliError::Usage("the configuration has no [[sweep]] tables".into()));
    }
    prepare_dir(out)?;
    let settings = config.sweep_settings();
    let mut results = Vec::new();
    for table in &config.sweeps {
        log::info!("sweep {}", table.name);
        let result = run_sweep(&config.benchmark, config.scheme, &table.axes, &settings)?;
        let path = out.join(format!("{}.csv", table.name));
        let mut w = create(&path)?;
        result.write_csv(&mut w)?;
        finish(w, &path)?;
        if result.all_failed() {
            log::warn!("sweep {}: no cell converged", table.name);
        }
        results.push((path, result));
    }
    Ok(results)
}

/// Exit status for a finished sweep: failure only when no cell of any table
/// converged.
pub fn sweep_exit_code(results: &[(PathBuf, SweepResult)]) -> i32 {
    if results.iter().all(|(_, r)| r.all_failed()) {
        EXIT_FAILED
    } else {
        EXIT_OK
    }
}

/// Runs a verification suite, optionally saving the JSON report as
/// `verify-<suite>.json` in `out`.
pub fn cmd_verify(suite: &str, out: Option<&Path>) -> Result<(VerifyReport, String), CliError> {
    let suite: Suite = suite
        .parse()
        .map_err(|_| CliError::Usage(format!("unknown suite '{suite}' (spectral, schur, oracle, monotone, all)")))?;
    let report = run_suite(suite);
    let json = report.to_json()?;
    if let Some(dir) = out {
        prepare_dir(dir)?;
        let path = dir.join(format!("verify-{suite}.json"));
        fs::write(&path, format!("{json}\n")).map_err(|e| CliError::io(format!("cannot write {}", path.display()), e))?;
    }
    Ok((report, json))
}
