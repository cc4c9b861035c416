use biotstab::benchmarks::{barry_mercer_problem, terzaghi_problem, BarryMercerSpec, TerzaghiSpec};
use biotstab::biot::relative_difference;
use biotstab::{optimal_parameters, run_transient, CouplingMode, Regime, Scheme, SolverChoice, StoppingRule};

fn column(k: f64, inv_beta: f64) -> biotstab::ProblemDefinition {
    terzaghi_problem(&TerzaghiSpec {
        conductivity: k,
        inv_beta,
        ..Default::default()
    })
    .unwrap()
}

#[test]
fn presets_need_two_iterations_on_the_column() {
    for scheme in [Scheme::P1P1, Scheme::Mini] {
        for (k, inv_beta, regime) in [
            (1e-6, 0.0, Regime::SmallStorage),
            (1e-10, 0.0, Regime::SmallStorage),
            (1e-6, 1.0, Regime::General),
        ] {
            let problem = column(k, inv_beta);
            let cfg = optimal_parameters(scheme, &problem.params, 1, regime)
                .unwrap()
                .with_stop(StoppingRule::residual(1e-8));
            let traj = run_transient(&problem, scheme, &SolverChoice::Coupled(cfg)).unwrap();
            assert_eq!(traj.reports[0].iterations, 2, "{scheme} K = {k}, 1/beta = {inv_beta}");
        }
    }
}

#[test]
fn multistep_coupled_run_tracks_the_monolithic_one() {
    let spec = BarryMercerSpec {
        cells: 8,
        steps: 3,
        ..Default::default()
    };
    let problem = barry_mercer_problem(&spec).unwrap();
    for scheme in [Scheme::P1P1, Scheme::Mini] {
        let cfg = optimal_parameters(scheme, &problem.params, 2, Regime::SmallStorage)
            .unwrap()
            .with_stop(StoppingRule::residual(1e-9).relative())
            .with_max_iterations(500);
        let coupled = run_transient(&problem, scheme, &SolverChoice::Coupled(cfg)).unwrap();
        let mono = run_transient(&problem, scheme, &SolverChoice::Monolithic { l: cfg.l }).unwrap();
        assert_eq!(coupled.states.len(), 3, "{:?}", coupled.reports.last().map(|r| r.reason));
        for (a, b) in coupled.states.iter().zip(&mono.states) {
            assert!((a.t - b.t).abs() < 1e-15);
            assert!(relative_difference(&a.p, &b.p) < 1e-6, "{scheme} pressure at t = {}", a.t);
            assert!(relative_difference(&a.u, &b.u) < 1e-6, "{scheme} displacement at t = {}", a.t);
        }
    }
}

#[test]
fn too_small_gamma_stops_the_transient_early() {
    let problem = terzaghi_problem(&TerzaghiSpec {
        conductivity: 1e-10,
        steps: 4,
        ..Default::default()
    })
    .unwrap();
    let base = optimal_parameters(Scheme::P1P1, &problem.params, 1, Regime::SmallStorage).unwrap();
    let mut cfg = base;
    cfg.mode = CouplingMode::OneParameter { gamma: 0.3 };
    let traj = run_transient(&problem, Scheme::P1P1, &SolverChoice::Coupled(cfg)).unwrap();
    assert!(traj.diverged());
    assert_eq!(traj.reports.len(), 1);
}
