use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use super::{check_monotone, dense_biot_oracle, scan_line, schur_two_iteration_check, spectral_equivalence};
use crate::assembly::{FeSpace, Scheme, SpaceKind};
use crate::benchmarks::{barry_mercer_problem, terzaghi_analytic, terzaghi_problem, BarryMercerSpec, TerzaghiSpec};
use crate::biot::{build_stabilized_system, run_transient, MonolithicSolver, ProblemDefinition, Regime, SolverChoice};
use crate::assembly::assemble_rhs;
use crate::coupling::optimal_parameters;
use crate::error::{Error, Result};
use crate::mesh::Mesh;

/// Half-width of the scan-line window around the point source.
pub const NEAR_SOURCE: f64 = 0.125;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Suite {
    Spectral,
    Schur,
    Oracle,
    Monotone,
    All,
}

impl FromStr for Suite {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s {
            "spectral" => Ok(Suite::Spectral),
            "schur" => Ok(Suite::Schur),
            "oracle" => Ok(Suite::Oracle),
            "monotone" => Ok(Suite::Monotone),
            "all" => Ok(Suite::All),
            other => Err(Error::InvalidParameter(format!(
                "unknown suite '{other}' (expected spectral, schur, oracle, monotone or all)"
            ))),
        }
    }
}

impl fmt::Display for Suite {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let s = match self {
            Suite::Spectral => "spectral",
            Suite::Schur => "schur",
            Suite::Oracle => "oracle",
            Suite::Monotone => "monotone",
            Suite::All => "all",
        };
        f.write_str(s)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CheckResult {
    pub name: String,
    pub measured: f64,
    pub threshold: f64,
    pub passed: bool,
    pub detail: String,
}

impl CheckResult {
    pub fn at_most(name: impl Into<String>, measured: f64, threshold: f64) -> Self {
        CheckResult {
            name: name.into(),
            measured,
            threshold,
            passed: measured <= threshold,
            detail: String::new(),
        }
    }

    pub fn at_least(name: impl Into<String>, measured: f64, threshold: f64) -> Self {
        CheckResult {
            passed: measured >= threshold,
            ..Self::at_most(name, measured, threshold)
        }
    }

    pub fn with_detail(mut self, detail: impl Into<String>) -> Self {
        self.detail = detail.into();
        self
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct VerifyReport {
    pub suite: Suite,
    pub checks: Vec<CheckResult>,
}

impl VerifyReport {
    pub fn passed(&self) -> bool {
        self.checks.iter().all(|c| c.passed)
    }

    pub fn to_json(&self) -> Result<String> {
        Ok(serde_json::to_string_pretty(self)?)
    }
}

fn failed(name: &str, err: Error) -> CheckResult {
    CheckResult {
        name: name.to_string(),
        measured: f64::NAN,
        threshold: f64::NAN,
        passed: false,
        detail: format!("error: {err}"),
    }
}

fn spectral_checks(out: &mut Vec<CheckResult>) {
    let report = |dim: usize, n: usize| {
        let mesh = Mesh::build(dim, n, &vec![1.0; dim])?;
        let space = FeSpace::new(SpaceKind::P1Scalar, &mesh);
        spectral_equivalence(&mesh, &space)
    };
    for n in [8, 32] {
        let name = format!("spectral-1d-n{n}");
        match report(1, n) {
            Ok(r) => out.push(
                CheckResult::at_most(&name, (r.c1 - 6.0).abs().max((r.c2 - 6.0).abs()), 1e-10)
                    .with_detail(format!("C1 = {:.12}, C2 = {:.12}", r.c1, r.c2)),
            ),
            Err(e) => out.push(failed(&name, e)),
        }
    }
    match (report(2, 8), report(2, 16)) {
        (Ok(a), Ok(b)) => {
            out.push(
                CheckResult::at_most("spectral-2d-refinement", (a.c1 - b.c1).abs().max((a.c2 - b.c2).abs()), 1e-8)
                    .with_detail(format!("h=1/8: [{:.10}, {:.10}], h=1/16: [{:.10}, {:.10}]", a.c1, a.c2, b.c1, b.c2)),
            );
            out.push(CheckResult::at_most("spectral-2d-positive", -a.c1.min(b.c1), 0.0));
            out.push(CheckResult::at_most("lumping-defect-psd", -a.z_min_eigenvalue.min(b.z_min_eigenvalue), 1e-12));
        }
        (Err(e), _) | (_, Err(e)) => out.push(failed("spectral-2d", e)),
    }
}

fn terzaghi(k: f64, inv_beta: f64, cells: usize) -> Result<ProblemDefinition> {
    terzaghi_problem(&TerzaghiSpec {
        conductivity: k,
        inv_beta,
        cells,
        ..Default::default()
    })
}

fn schur_checks(out: &mut Vec<CheckResult>) {
    let cases = [
        ("schur-p1p1-small-storage", Scheme::P1P1, 0.0, Regime::SmallStorage),
        ("schur-mini-small-storage", Scheme::Mini, 0.0, Regime::SmallStorage),
        ("schur-p1p1-two-parameter", Scheme::P1P1, 1.0, Regime::General),
        ("schur-mini-two-parameter", Scheme::Mini, 1.0, Regime::General),
    ];
    for (name, scheme, inv_beta, regime) in cases {
        let run = || -> Result<_> {
            let problem = terzaghi(1e-6, inv_beta, 32)?;
            let cfg = optimal_parameters(scheme, &problem.params, 1, regime)?;
            let system = build_stabilized_system(&problem, scheme, problem.tau(), Some(cfg.l))?;
            schur_two_iteration_check(&system, &cfg)
        };
        match run() {
            Ok(c) => {
                out.push(
                    CheckResult::at_most(name, c.ratio, 1e-10)
                        .with_detail(format!("||S|| = {:.3e}, ||S^2|| = {:.3e}", c.s_norm, c.s2_norm)),
                );
                if regime == Regime::SmallStorage {
                    if let Some(d) = c.schur_discrepancy {
                        out.push(CheckResult::at_most(format!("{name}-schur-identity"), d, 1e-12));
                    }
                }
            }
            Err(e) => out.push(failed(name, e)),
        }
    }
}

fn oracle_checks(out: &mut Vec<CheckResult>) {
    for scheme in [Scheme::P1P1, Scheme::Mini] {
        let problems: Vec<(&str, Result<ProblemDefinition>)> = vec![
            ("1d", terzaghi(1e-6, 0.0, 8)),
            (
                "2d",
                barry_mercer_problem(&BarryMercerSpec {
                    cells: 4,
                    ..Default::default()
                }),
            ),
        ];
        for (tag, problem) in problems {
            let name = format!("oracle-{tag}-{}", scheme.name());
            let run = || -> Result<(f64, f64)> {
                let problem = problem?;
                let tau = problem.tau();
                let oracle = dense_biot_oracle(&problem, scheme, tau)?;
                let system = build_stabilized_system(&problem, scheme, tau, Some(oracle.l))?;
                let assembly = oracle.compare(&system)?.max();
                let (f, g) = assemble_rhs(&problem, scheme, tau)?;
                let prev = crate::biot::SolutionState::zeros(system.nu(), system.np());
                let state = MonolithicSolver::new(&system)?.step(&prev, &f, &g, tau)?;
                let (eu, ep) = oracle.solution_error(&state);
                Ok((assembly, eu.max(ep)))
            };
            match run() {
                Ok((assembly, solve)) => {
                    out.push(CheckResult::at_most(format!("{name}-assembly"), assembly, 1e-12));
                    out.push(CheckResult::at_most(format!("{name}-solve"), solve, 1e-10));
                }
                Err(e) => out.push(failed(&name, e)),
            }
        }
    }
}

/// Pressure after one monolithic step of the column with stabilization `l`.
fn terzaghi_profile(spec: &TerzaghiSpec, scheme: Scheme, l: f64) -> Result<Vec<f64>> {
    let problem = terzaghi_problem(spec)?;
    let traj = run_transient(&problem, scheme, &SolverChoice::Monolithic { l })?;
    Ok(traj.last().p.clone())
}

/// Largest value of the series solution on the column nodes at the final time.
pub fn terzaghi_envelope(spec: &TerzaghiSpec) -> f64 {
    (0..=spec.cells)
        .map(|i| terzaghi_analytic(spec.height * i as f64 / spec.cells as f64, spec.final_time, spec, 2001))
        .fold(0.0, f64::max)
}

fn monotone_checks(out: &mut Vec<CheckResult>) {
    let spec = TerzaghiSpec::default();
    let sigma0 = spec.load;
    let tol = 1e-10 * sigma0;
    let envelope = terzaghi_envelope(&spec);
    for scheme in [Scheme::P1P1, Scheme::Mini] {
        let name = format!("monotone-terzaghi-{}", scheme.name());
        let run = || -> Result<_> {
            let l = terzaghi_problem(&spec)?.default_stabilization(scheme)?;
            let plain = check_monotone(&terzaghi_profile(&spec, scheme, 0.0)?, tol);
            let stab = check_monotone(&terzaghi_profile(&spec, scheme, l)?, tol);
            Ok((plain, stab))
        };
        match run() {
            Ok((plain, stab)) => {
                out.push(
                    CheckResult::at_least(format!("{name}-unstabilized-overshoot"), plain.max - envelope, 1e-3 * sigma0)
                        .with_detail(format!("reversals = {}", plain.reversals)),
                );
                out.push(CheckResult::at_most(format!("{name}-stabilized-below-zero"), -stab.min, tol));
                out.push(CheckResult::at_most(format!("{name}-stabilized-above-envelope"), stab.max - envelope, tol));
                out.push(CheckResult::at_most(
                    format!("{name}-stabilized-reversals"),
                    stab.reversals as f64,
                    0.0,
                ));
            }
            Err(e) => out.push(failed(&name, e)),
        }
    }
    // The far field of the point-source problem is slightly negative in the
    // continuous solution as well, so only the neighbourhood of the source is
    // inspected here.
    let spec = BarryMercerSpec {
        cells: 64,
        poisson: 0.1,
        ..Default::default()
    };
    for scheme in [Scheme::P1P1, Scheme::Mini] {
        let name = format!("monotone-barry-mercer-{}-near-source", scheme.name());
        let run = || -> Result<(f64, bool)> {
            let l = barry_mercer_problem(&spec)?.default_stabilization(scheme)?;
            let window = |l: f64| -> Result<Vec<f64>> {
                Ok(barry_mercer_scan(&spec, scheme, l)?
                    .into_iter()
                    .filter(|(x, _)| (x - spec.source[0]).abs() <= NEAR_SOURCE + 1e-12)
                    .map(|(_, v)| v)
                    .collect())
            };
            let stab = window(l)?;
            let scale = stab.iter().fold(0.0_f64, |m, v| m.max(v.abs()));
            let plain = check_monotone(&window(0.0)?, 1e-10 * scale);
            let stab = check_monotone(&stab, 1e-10 * scale);
            Ok((plain.min / scale, stab.oscillation_free(true)))
        };
        match run() {
            Ok((plain_rel_min, stab_ok)) => {
                out.push(CheckResult::at_most(
                    format!("{name}-unstabilized-undershoot"),
                    plain_rel_min,
                    -1e-3,
                ));
                out.push(
                    CheckResult::at_most(format!("{name}-stabilized-single-peak"), f64::from(u8::from(!stab_ok)), 0.0)
                        .with_detail(format!("single peak = {stab_ok}")),
                );
            }
            Err(e) => out.push(failed(&name, e)),
        }
    }
}

/// Runs the named checks on their default small instances.
pub fn run_suite(suite: Suite) -> VerifyReport {
    let mut checks = Vec::new();
    if matches!(suite, Suite::Spectral | Suite::All) {
        spectral_checks(&mut checks);
    }
    if matches!(suite, Suite::Schur | Suite::All) {
        schur_checks(&mut checks);
    }
    if matches!(suite, Suite::Oracle | Suite::All) {
        oracle_checks(&mut checks);
    }
    if matches!(suite, Suite::Monotone | Suite::All) {
        monotone_checks(&mut checks);
    }
    VerifyReport { suite, checks }
}

/// Pressure along the horizontal mesh line through the source of the
/// point-source problem after one monolithic step.
pub fn barry_mercer_scan(spec: &BarryMercerSpec, scheme: Scheme, l: f64) -> Result<Vec<(f64, f64)>> {
    let problem = barry_mercer_problem(spec)?;
    let traj = run_transient(&problem, scheme, &SolverChoice::Monolithic { l })?;
    scan_line(&problem.mesh, &traj.last().p, 0, &spec.source)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn suite_names_round_trip() {
        for s in [Suite::Spectral, Suite::Schur, Suite::Oracle, Suite::Monotone, Suite::All] {
            assert_eq!(s.to_string().parse::<Suite>().unwrap(), s);
        }
        assert!("fast".parse::<Suite>().is_err());
    }

    #[test]
    fn schur_suite_passes() {
        let r = run_suite(Suite::Schur);
        assert!(r.passed(), "{}", r.to_json().unwrap());
    }

    #[test]
    fn oracle_suite_passes() {
        let r = run_suite(Suite::Oracle);
        assert!(r.passed(), "{}", r.to_json().unwrap());
    }

    #[test]
    fn spectral_and_monotone_suites_pass() {
        for s in [Suite::Spectral, Suite::Monotone] {
            let r = run_suite(s);
            assert!(r.passed(), "{}", r.to_json().unwrap());
        }
    }
}
