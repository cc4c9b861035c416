//! Acceptance suite: one PASS/FAIL line per criterion.
//!
//! Runs with `cargo test -p biotstab --test acceptance`. Criteria numbers may
//! be passed as arguments to run a subset. The process exits 0 even when a
//! criterion fails, so the verdict lines are the result; set
//! `BIOTSTAB_ACCEPT_STRICT=1` to turn any FAIL into a nonzero exit.

use std::time::{Duration, Instant};

use biotstab::assembly::{assemble_mass, assemble_pressure_stiffness, assemble_rhs, lump_mass, SpaceKind};
use biotstab::benchmarks::{
    barry_mercer_problem, run_sweep, terzaghi_problem, BarryMercerSpec, Benchmark, FootingSpec,
    SweepAxes, SweepResult, SweepSettings, TerzaghiSpec,
};
use biotstab::biot::{monolithic_step, relative_difference};
use biotstab::coupling::StopReason;
use biotstab::verify::{
    barry_mercer_scan, check_monotone, dense_biot_oracle, schur_two_iteration_check, terzaghi_envelope,
};
use biotstab::{
    build_stabilized_system, optimal_parameters, run_transient, CoupledSolver, CouplingMode, FeSpace, Mesh,
    ProblemDefinition, Regime, Scheme, SolutionState, SolverChoice, SolverConfig, StoppingRule,
};

type Res<T> = Result<T, Box<dyn std::error::Error>>;

const RESIDUAL_TOL: f64 = 1e-8;
const NILPOTENT_RATIO: f64 = 1e-10;
/// Perturbed presets must miss the nilpotency bound by six orders.
const PERTURBED_RATIO: f64 = NILPOTENT_RATIO * 1e6;
const GAMMA_SHIFT: f64 = 0.1;
const UNDERSHOOT_PRESENT: f64 = -1e-3;
const UNDERSHOOT_ABSENT: f64 = 1e-10;
const TABLE_SLACK_2D: i64 = 2;
const TABLE_SLACK_3D: i64 = 1;
const SPECTRAL_TOL: f64 = 1e-13;
const ORACLE_TOL: f64 = 1e-10;
const CONTRACTION_SLACK: f64 = 1e-12;
const AGREEMENT_TOL: f64 = 1e-6;
const CONTRACTION_STOP: f64 = 1e-8;

const CONDUCTIVITIES: [f64; 6] = [1e-2, 1e-4, 1e-6, 1e-8, 1e-10, 1e-12];
const POISSONS: [f64; 5] = [0.1, 0.2, 0.3, 0.4, 0.49];
const CELLS_2D: [usize; 4] = [16, 32, 64, 128];
const CELLS_3D: [usize; 2] = [4, 8];
const YOUNG_TABLES: f64 = 1e5;

// Reference iteration counts; rows follow CONDUCTIVITIES or POISSONS, columns the mesh sizes.
const REF_P1P1_2D_K: [[i64; 4]; 6] = [[4, 4, 4, 4], [6, 6, 6, 6], [11, 11, 11, 11], [15, 15, 15, 15], [11, 11, 12, 12], [6, 7, 7, 8]];
const REF_P1P1_2D_NU: [[i64; 4]; 5] = [[18, 20, 21, 22], [16, 17, 18, 19], [13, 14, 15, 16], [11, 11, 12, 12], [12, 11, 9, 8]];
const REF_MINI_2D_K: [[i64; 4]; 6] = [[4, 4, 4, 4], [5, 5, 5, 5], [10, 10, 10, 10], [13, 13, 13, 13], [14, 13, 13, 13], [14, 14, 14, 14]];
const REF_MINI_2D_NU: [[i64; 4]; 5] = [[25, 25, 25, 24], [21, 21, 21, 21], [17, 17, 17, 17], [14, 13, 13, 13], [11, 10, 9, 7]];
const REF_P1P1_3D_K: [[i64; 2]; 6] = [[2, 2], [2, 2], [3, 3], [3, 3], [3, 3], [3, 3]];
const REF_P1P1_3D_NU: [[i64; 2]; 5] = [[5, 6], [4, 5], [4, 4], [3, 3], [2, 2]];
const REF_MINI_3D_K: [[i64; 2]; 6] = [[2, 2], [2, 2], [3, 3], [4, 4], [4, 4], [4, 4]];
const REF_MINI_3D_NU: [[i64; 2]; 5] = [[6, 6], [5, 6], [4, 5], [4, 4], [2, 2]];

struct Log(Vec<String>);

impl Log {
    fn line(&mut self, s: impl Into<String>) {
        self.0.push(s.into());
    }

    /// Records a sub-check and returns its verdict.
    fn check(&mut self, ok: bool, s: impl AsRef<str>) -> bool {
        self.0.push(format!("[{}] {}", if ok { "ok" } else { "FAIL" }, s.as_ref()));
        ok
    }
}

fn column(k: f64, inv_beta: f64, cells: usize) -> Res<ProblemDefinition> {
    Ok(terzaghi_problem(&TerzaghiSpec {
        conductivity: k,
        inv_beta,
        cells,
        ..Default::default()
    })?)
}

fn coupled_report(problem: &ProblemDefinition, cfg: SolverConfig) -> Res<biotstab::IterationReport> {
    let traj = run_transient(problem, cfg.scheme, &SolverChoice::Coupled(cfg))?;
    Ok(traj.reports.into_iter().next().ok_or("no coupled step was run")?)
}

/// Exactly two iterations, or three when the second residual is already
/// within ten times the tolerance.
fn two_iterations(report: &biotstab::IterationReport) -> bool {
    report.converged
        && (report.iterations == 2
            || (report.iterations == 3 && report.residuals[1] <= 10.0 * RESIDUAL_TOL))
}

fn two_iteration_case(log: &mut Log, problem: &ProblemDefinition, scheme: Scheme, regime: Regime) -> Res<bool> {
    let cfg = optimal_parameters(scheme, &problem.params, 1, regime)?.with_stop(StoppingRule::residual(RESIDUAL_TOL));
    let r = coupled_report(problem, cfg)?;
    let (g1, g2) = cfg.mode.gammas();
    Ok(log.check(
        two_iterations(&r),
        format!(
            "{scheme} K={:e} 1/beta={} L={:.4} gammas=({g1:.4}, {g2:.4}): {} iterations, residuals {:?}",
            problem.params.conductivity,
            problem.params.inv_beta,
            cfg.l,
            r.iterations,
            r.residuals.iter().map(|v| format!("{v:.1e}")).collect::<Vec<_>>()
        ),
    ))
}

fn c1(log: &mut Log) -> Res<bool> {
    let mut ok = true;
    for k in [1e-6, 1e-10] {
        ok &= two_iteration_case(log, &column(k, 0.0, 32)?, Scheme::P1P1, Regime::SmallStorage)?;
    }
    Ok(ok)
}

fn c2(log: &mut Log) -> Res<bool> {
    let mut ok = true;
    for k in [1e-6, 1e-10] {
        ok &= two_iteration_case(log, &column(k, 0.0, 32)?, Scheme::Mini, Regime::SmallStorage)?;
    }
    Ok(ok)
}

fn c3(log: &mut Log) -> Res<bool> {
    let mut ok = true;
    for k in [1e-6, 1e-10] {
        let problem = column(k, 1.0, 32)?;
        ok &= two_iteration_case(log, &problem, Scheme::P1P1, Regime::General)?;
        let mini = optimal_parameters(Scheme::Mini, &problem.params, 1, Regime::General)?;
        ok &= log.check(
            mini.l == 2.0 && mini.mode == (CouplingMode::TwoParameter { gamma1: 1.0, gamma2: 0.5 }),
            format!("MINI preset L={}, {:?}", mini.l, mini.mode),
        );
        ok &= two_iteration_case(log, &problem, Scheme::Mini, Regime::General)?;
    }
    Ok(ok)
}

fn shifted(cfg: &SolverConfig, delta: f64) -> SolverConfig {
    let mode = match cfg.mode {
        CouplingMode::OneParameter { gamma } => CouplingMode::OneParameter { gamma: gamma + delta },
        CouplingMode::TwoParameter { gamma1, gamma2 } => CouplingMode::TwoParameter {
            gamma1: gamma1 + delta,
            gamma2,
        },
    };
    SolverConfig { mode, ..*cfg }
}

fn c4(log: &mut Log) -> Res<bool> {
    let mut ok = true;
    for (inv_beta, regime) in [(0.0, Regime::SmallStorage), (1.0, Regime::General)] {
        for scheme in [Scheme::P1P1, Scheme::Mini] {
            for cells in [8, 16, 32, 64] {
                let problem = column(1e-6, inv_beta, cells)?;
                let cfg = optimal_parameters(scheme, &problem.params, 1, regime)?;
                let system = build_stabilized_system(&problem, scheme, problem.tau(), Some(cfg.l))?;
                let at = schur_two_iteration_check(&system, &cfg)?;
                let lo = schur_two_iteration_check(&system, &shifted(&cfg, -GAMMA_SHIFT))?;
                let hi = schur_two_iteration_check(&system, &shifted(&cfg, GAMMA_SHIFT))?;
                ok &= log.check(
                    at.ratio <= NILPOTENT_RATIO && lo.ratio >= PERTURBED_RATIO && hi.ratio >= PERTURBED_RATIO,
                    format!(
                        "{scheme} {regime:?} h=1/{cells}: ||S^2||/||S||^2 = {:.1e}; shifted by -/+{GAMMA_SHIFT}: {:.1e} / {:.1e}",
                        at.ratio, lo.ratio, hi.ratio
                    ),
                );
            }
        }
    }
    Ok(ok)
}

fn c5(log: &mut Log) -> Res<bool> {
    let mut ok = true;
    let bench = Benchmark::Terzaghi(TerzaghiSpec {
        conductivity: 1e-10,
        cells: 32,
        ..Default::default()
    });
    let grid: Vec<f64> = (3..=20).map(|i| i as f64 / 10.0).collect();
    for (scheme, best) in [(Scheme::P1P1, 2.0 / 3.0), (Scheme::Mini, 1.0)] {
        let mut gammas = grid.clone();
        if !gammas.iter().any(|g| (g - best).abs() < 1e-12) {
            gammas.push(best);
            gammas.sort_by(f64::total_cmp);
        }
        let axes = SweepAxes {
            gamma: Some(gammas),
            ..Default::default()
        };
        let r = run_sweep(&bench, scheme, &axes, &SweepSettings::for_benchmark(&bench))?;
        let count = |c: &biotstab::benchmarks::SweepCell| if c.converged { c.iterations } else { usize::MAX };
        let at_best = r.cells.iter().find(|c| (c.gamma.unwrap() - best).abs() < 1e-12).ok_or("grid lost its optimum")?;
        let strict_min = r
            .cells
            .iter()
            .filter(|c| (c.gamma.unwrap() - best).abs() >= 1e-12)
            .all(|c| count(c) > count(at_best));
        let summary: Vec<String> = r
            .cells
            .iter()
            .map(|c| {
                if c.converged {
                    format!("{:.2}:{}", c.gamma.unwrap(), c.iterations)
                } else {
                    format!("{:.2}:{}", c.gamma.unwrap(), c.status)
                }
            })
            .collect();
        log.line(format!("{scheme}: {}", summary.join(" ")));
        ok &= log.check(strict_min, format!("{scheme}: unique minimum {} at gamma={best:.4}", at_best.iterations));
        if scheme == Scheme::P1P1 {
            let low = r.cells.iter().filter(|c| c.gamma.unwrap() <= 0.3 + 1e-12);
            let flagged = low.clone().all(|c| c.status == "diverged" || c.status == "non-finite");
            ok &= log.check(flagged, "P1P1: divergence flagged for gamma <= 0.3");
        }
    }
    Ok(ok)
}

fn terzaghi_profile(spec: &TerzaghiSpec, scheme: Scheme, l: f64) -> Res<Vec<f64>> {
    let problem = terzaghi_problem(spec)?;
    let traj = run_transient(&problem, scheme, &SolverChoice::Monolithic { l })?;
    Ok(traj.last().p.clone())
}

fn c6(log: &mut Log) -> Res<bool> {
    let mut ok = true;
    let spec = TerzaghiSpec::default();
    let sigma0 = spec.load;
    let envelope = terzaghi_envelope(&spec);
    for scheme in [Scheme::P1P1, Scheme::Mini] {
        let l = terzaghi_problem(&spec)?.default_stabilization(scheme)?;
        let plain = check_monotone(&terzaghi_profile(&spec, scheme, 0.0)?, UNDERSHOOT_ABSENT * sigma0);
        let stab = check_monotone(&terzaghi_profile(&spec, scheme, l)?, UNDERSHOOT_ABSENT * sigma0);
        ok &= log.check(
            plain.min < UNDERSHOOT_PRESENT * sigma0,
            format!(
                "Terzaghi {scheme} unstabilized: min p = {:.4e} sigma0 (max {:.4} sigma0 vs series {:.4}, {} reversals)",
                plain.min / sigma0,
                plain.max / sigma0,
                envelope / sigma0,
                plain.reversals
            ),
        );
        ok &= log.check(
            stab.min >= -UNDERSHOOT_ABSENT * sigma0 && stab.max <= envelope + UNDERSHOOT_ABSENT * sigma0 && stab.monotone,
            format!(
                "Terzaghi {scheme} stabilized L={l}: min {:.3e}, max - series max {:.3e}, monotone {}",
                stab.min,
                stab.max - envelope,
                stab.monotone
            ),
        );
    }
    let bm = BarryMercerSpec {
        cells: 64,
        poisson: 0.1,
        conductivity: 1e-6,
        ..Default::default()
    };
    for scheme in [Scheme::P1P1, Scheme::Mini] {
        let l = barry_mercer_problem(&bm)?.default_stabilization(scheme)?;
        let values = |l: f64| -> Res<Vec<f64>> { Ok(barry_mercer_scan(&bm, scheme, l)?.into_iter().map(|(_, v)| v).collect()) };
        let stab_values = values(l)?;
        // No load scale is defined for the source problem; use the peak.
        let scale = stab_values.iter().fold(0.0_f64, |m, v| m.max(v.abs()));
        let plain = check_monotone(&values(0.0)?, UNDERSHOOT_ABSENT * scale);
        let stab = check_monotone(&stab_values, UNDERSHOOT_ABSENT * scale);
        ok &= log.check(
            plain.min < UNDERSHOOT_PRESENT * scale,
            format!("Barry-Mercer {scheme} unstabilized: min p = {:.3e} peak", plain.min / scale),
        );
        ok &= log.check(
            stab.oscillation_free(true),
            format!(
                "Barry-Mercer {scheme} stabilized: min p = {:.3e} peak, {} reversals along the scan line",
                stab.min / scale,
                stab.reversals
            ),
        );
    }
    Ok(ok)
}

#[allow(clippy::too_many_arguments)]
fn compare_table<const N: usize>(
    log: &mut Log,
    label: &str,
    result: &SweepResult,
    rows: &[f64],
    by_poisson: bool,
    fixed: f64,
    expected: &[[i64; N]],
    slack: i64,
) -> bool {
    let mut ok = true;
    for (i, &row) in rows.iter().enumerate() {
        let mut cells = Vec::new();
        for (j, &n) in result.cells_axis.iter().enumerate() {
            let (k, nu) = if by_poisson { (fixed, Some(row)) } else { (row, Some(fixed)) };
            let got = result.get(n, k, nu, None).map(|c| (c.iterations as i64, c.converged));
            let want = expected[i][j];
            let cell_ok = matches!(got, Some((it, true)) if (it - want).abs() <= slack);
            ok &= cell_ok;
            cells.push(match got {
                Some((it, true)) => format!("{it:>3}/{want:<3}{}", if cell_ok { " " } else { "*" }),
                _ => format!("  -/{want:<3}*"),
            });
        }
        let name = if by_poisson { format!("nu={row}") } else { format!("K={row:e}") };
        log.line(format!("{label} {name:>9}: {}", cells.join(" ")));
    }
    ok
}

fn table(log: &mut Log, bench: Benchmark, scheme: Scheme, cells: &[usize], tables: (&[[i64; 4]], &[[i64; 4]]), slack: i64) -> Res<bool> {
    let settings = SweepSettings::for_benchmark(&bench);
    let by_k = run_sweep(
        &bench.with_poisson(0.4)?,
        scheme,
        &SweepAxes {
            cells: Some(cells.to_vec()),
            conductivity: Some(CONDUCTIVITIES.to_vec()),
            ..Default::default()
        },
        &settings,
    )?;
    let by_nu = run_sweep(
        &bench.with_conductivity(1e-10),
        scheme,
        &SweepAxes {
            cells: Some(cells.to_vec()),
            poisson: Some(POISSONS.to_vec()),
            ..Default::default()
        },
        &settings,
    )?;
    log.line(format!("{scheme}: measured/reference, * marks a cell outside +-{slack}"));
    let a = compare_table(log, "(a)", &by_k, &CONDUCTIVITIES, false, 0.4, tables.0, slack);
    let b = compare_table(log, "(b)", &by_nu, &POISSONS, true, 1e-10, tables.1, slack);
    log.check(a, "(a) conductivity sweep");
    log.check(b, "(b) Poisson sweep");
    Ok(a && b)
}

fn c7(log: &mut Log) -> Res<bool> {
    let bench = Benchmark::BarryMercer(BarryMercerSpec {
        young: YOUNG_TABLES,
        ..Default::default()
    });
    table(log, bench, Scheme::P1P1, &CELLS_2D, (&REF_P1P1_2D_K, &REF_P1P1_2D_NU), TABLE_SLACK_2D)
}

fn c8(log: &mut Log) -> Res<bool> {
    let bench = Benchmark::BarryMercer(BarryMercerSpec {
        young: YOUNG_TABLES,
        ..Default::default()
    });
    table(log, bench, Scheme::Mini, &CELLS_2D, (&REF_MINI_2D_K, &REF_MINI_2D_NU), TABLE_SLACK_2D)
}

fn widen(t: &[[i64; 2]]) -> Vec<[i64; 4]> {
    t.iter().map(|r| [r[0], r[1], 0, 0]).collect()
}

fn c9(log: &mut Log) -> Res<bool> {
    let bench = Benchmark::Footing3d(FootingSpec {
        young: YOUNG_TABLES,
        ..Default::default()
    });
    let p1 = table(log, bench, Scheme::P1P1, &CELLS_3D, (&widen(&REF_P1P1_3D_K), &widen(&REF_P1P1_3D_NU)), TABLE_SLACK_3D)?;
    let mini = table(log, bench, Scheme::Mini, &CELLS_3D, (&widen(&REF_MINI_3D_K), &widen(&REF_MINI_3D_NU)), TABLE_SLACK_3D)?;
    Ok(p1 && mini)
}

fn c10(log: &mut Log) -> Res<bool> {
    let mut ok = true;
    for n in [8, 32] {
        let mesh = Mesh::build(1, n, &[1.0])?;
        let space = FeSpace::new(SpaceKind::P1Scalar, &mesh);
        let h = 1.0 / n as f64;
        let lp = assemble_pressure_stiffness(&space, &mesh, 1.0)?.scale(h * h);
        let z = lump_mass(&space, &mesh)?.add(1.0, &assemble_mass(&space, &mesh)?, -1.0)?;
        let diff = lp.add(1.0, &z, -6.0)?.max_abs();
        let rel = diff / lp.max_abs();
        ok &= log.check(rel <= SPECTRAL_TOL, format!("h=1/{n}: max|h^2 L_p - 6 Z| / max|h^2 L_p| = {rel:.2e}"));
    }
    Ok(ok)
}

fn c11(log: &mut Log) -> Res<bool> {
    let mut ok = true;
    for scheme in [Scheme::P1P1, Scheme::Mini] {
        let cases = [
            ("1D h=1/8", column(1e-6, 0.0, 8)?),
            (
                "2D h=1/4",
                barry_mercer_problem(&BarryMercerSpec {
                    cells: 4,
                    ..Default::default()
                })?,
            ),
        ];
        for (tag, problem) in cases {
            let tau = problem.tau();
            let oracle = dense_biot_oracle(&problem, scheme, tau)?;
            let system = build_stabilized_system(&problem, scheme, tau, Some(oracle.l))?;
            let assembly = oracle.compare(&system)?.max();
            let (f, g) = assemble_rhs(&problem, scheme, tau)?;
            let prev = SolutionState::zeros(system.nu(), system.np());
            let state = monolithic_step(&system, &prev, &f, &g, tau)?;
            let (eu, ep) = oracle.solution_error(&state);
            ok &= log.check(
                assembly <= ORACLE_TOL && eu <= ORACLE_TOL && ep <= ORACLE_TOL,
                format!("{scheme} {tag}: blocks {assembly:.1e}, u {eu:.1e}, p {ep:.1e}"),
            );
        }
    }
    Ok(ok)
}

fn contraction_case(log: &mut Log, tag: &str, problem: &ProblemDefinition, scheme: Scheme, mode: CouplingMode) -> Res<bool> {
    let dim = problem.dim();
    let params = &problem.params;
    let regime = if matches!(mode, CouplingMode::TwoParameter { .. }) { Regime::General } else { Regime::SmallStorage };
    let preset = optimal_parameters(scheme, params, dim, regime)?;
    let (g1, g2) = mode.gammas();
    let c = params.alpha * params.alpha / params.constrained_modulus(dim);
    // Smallest L with omega >= 1, unless the preset is already larger.
    let l = preset.l.max(c / (g1 - g2));
    // Stop well above the roundoff floor of the monolithic reference.
    let cfg = SolverConfig::new(scheme, l, mode)
        .with_stop(StoppingRule::residual(CONTRACTION_STOP).relative())
        .with_max_iterations(100);
    let omega = cfg.omega(params, dim);
    let tau = problem.tau();
    let system = build_stabilized_system(problem, scheme, tau, Some(l))?;
    let (f, g) = assemble_rhs(problem, scheme, tau)?;
    let prev = SolutionState::zeros(system.nu(), system.np());
    let exact = monolithic_step(&system, &prev, &f, &g, tau)?;
    let (_, report) = CoupledSolver::new(&system, cfg)?.solve_step(&prev, &f, &g, tau, Some(&exact))?;
    let worst = report
        .composite
        .windows(2)
        .map(|w| if w[0] > 0.0 { w[1] / w[0] - 1.0 } else if w[1] > 0.0 { f64::INFINITY } else { 0.0 })
        .fold(f64::NEG_INFINITY, f64::max);
    Ok(log.check(
        worst <= CONTRACTION_SLACK && report.converged,
        format!(
            "{tag} {scheme} gammas=({g1}, {g2}) omega={omega:.3}: {} iterations, largest relative change {worst:+.2e}",
            report.iterations
        ),
    ))
}

fn c12(log: &mut Log) -> Res<bool> {
    let mut ok = true;
    let one_d = column(1e-6, 0.0, 16)?;
    let one_d_storage = column(1e-6, 1.0, 16)?;
    let two_d = barry_mercer_problem(&BarryMercerSpec {
        cells: 16,
        ..Default::default()
    })?;
    let two_d_storage = barry_mercer_problem(&BarryMercerSpec {
        cells: 16,
        inv_beta: 1e-5,
        ..Default::default()
    })?;
    for scheme in [Scheme::P1P1, Scheme::Mini] {
        for gamma in [0.6, 1.0, 1.5, 2.0] {
            let one = CouplingMode::OneParameter { gamma };
            let two = CouplingMode::TwoParameter {
                gamma1: gamma,
                gamma2: gamma / 2.0,
            };
            ok &= contraction_case(log, "1D", &one_d, scheme, one)?;
            ok &= contraction_case(log, "1D 1/beta=1", &one_d_storage, scheme, two)?;
            ok &= contraction_case(log, "2D", &two_d, scheme, one)?;
            ok &= contraction_case(log, "2D 1/beta=1e-5", &two_d_storage, scheme, two)?;
        }
    }
    Ok(ok)
}

fn c13(log: &mut Log) -> Res<bool> {
    let mut ok = true;
    let benches = [
        Benchmark::Terzaghi(TerzaghiSpec::default()),
        Benchmark::BarryMercer(BarryMercerSpec {
            cells: CELLS_2D[0],
            young: YOUNG_TABLES,
            ..Default::default()
        }),
        Benchmark::Footing3d(FootingSpec {
            cells: CELLS_3D[0],
            young: YOUNG_TABLES,
            ..Default::default()
        }),
    ];
    for bench in benches {
        let problem = bench.problem()?;
        for scheme in [Scheme::P1P1, Scheme::Mini] {
            let cfg = optimal_parameters(scheme, &problem.params, problem.dim(), Regime::SmallStorage)?
                .with_stop(bench.default_stop());
            let coupled = run_transient(&problem, scheme, &SolverChoice::Coupled(cfg))?;
            let mono = run_transient(&problem, scheme, &SolverChoice::Monolithic { l: cfg.l })?;
            let converged = coupled.reports.iter().all(|r| r.converged && r.reason == StopReason::Converged);
            let du = relative_difference(&coupled.last().u, &mono.last().u);
            let dp = relative_difference(&coupled.last().p, &mono.last().p);
            ok &= log.check(
                converged && du <= AGREEMENT_TOL && dp <= AGREEMENT_TOL,
                format!("{} {scheme} h=1/{}: u {du:.1e}, p {dp:.1e}", bench.name(), bench.cells()),
            );
        }
    }
    Ok(ok)
}

type Criterion = (u32, &'static str, Option<Duration>, fn(&mut Log) -> Res<bool>);

fn main() {
    let secs = |s: u64| Some(Duration::from_secs(s));
    let criteria: [Criterion; 13] = [
        (1, "two iterations, P1-P1 one-parameter preset", secs(1), c1),
        (2, "two iterations, MINI one-parameter preset", secs(1), c2),
        (3, "two iterations, two-parameter presets with 1/beta = 1", secs(1), c3),
        (4, "nilpotent iteration matrix and its sensitivity to gamma", secs(10), c4),
        (5, "gamma sweep minimum and divergence", secs(30), c5),
        (6, "oscillation removal", secs(60), c6),
        (7, "2D iteration table, P1-P1", None, c7),
        (8, "2D iteration table, MINI", None, c8),
        (9, "3D iteration tables", secs(600), c9),
        (10, "1D lumping defect identity", secs(1), c10),
        (11, "dense oracle equivalence", secs(30), c11),
        (12, "composite error contraction", secs(120), c12),
        (13, "coupled and monolithic solutions agree", secs(120), c13),
    ];
    let selected: Vec<u32> = std::env::args().skip(1).filter_map(|a| a.parse().ok()).collect();
    let mut passed = 0;
    let mut run = 0;
    for (id, title, budget, f) in criteria {
        if !selected.is_empty() && !selected.contains(&id) {
            continue;
        }
        run += 1;
        let mut log = Log(Vec::new());
        let start = Instant::now();
        let outcome = f(&mut log);
        let elapsed = start.elapsed();
        let in_time = budget.is_none_or(|b| elapsed <= b);
        let ok = match &outcome {
            Ok(ok) => *ok && in_time,
            Err(_) => false,
        };
        for l in &log.0 {
            println!("    {l}");
        }
        if let Err(e) = &outcome {
            println!("    error: {e}");
        }
        if !in_time {
            println!("    over the {:.0?} budget", budget.unwrap());
        }
        println!(
            "{} criterion {id:>2}: {title} ({:.2} s)",
            if ok { "PASS" } else { "FAIL" },
            elapsed.as_secs_f64()
        );
        passed += usize::from(ok);
    }
    println!("acceptance: {passed}/{run} criteria passed");
    let strict = std::env::var("BIOTSTAB_ACCEPT_STRICT").is_ok_and(|v| v == "1");
    if strict && passed < run {
        std::process::exit(1);
    }
}
