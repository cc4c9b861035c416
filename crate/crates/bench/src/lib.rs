//! Fixtures shared by the criterion benches.

use biotstab::benchmarks::{barry_mercer_problem, BarryMercerSpec};
use biotstab::{build_stabilized_system, optimal_parameters, DiscreteBiotSystem, ProblemDefinition, Regime, Scheme, SolverConfig};

/// The point-source square on an `n x n` grid with small-storage presets.
pub fn point_source(n: usize, scheme: Scheme) -> (ProblemDefinition, DiscreteBiotSystem, SolverConfig) {
    let spec = BarryMercerSpec {
        cells: n,
        conductivity: 1e-10,
        ..Default::default()
    };
    let problem = barry_mercer_problem(&spec).expect("valid spec");
    let config = optimal_parameters(scheme, &problem.params, 2, Regime::SmallStorage).expect("presets");
    let system = build_stabilized_system(&problem, scheme, problem.tau(), Some(config.l)).expect("assembly");
    (problem, system, config)
}
