//! Problem definition, the stabilized discrete operator and time stepping.

mod monolithic;
mod params;
mod system;

pub use monolithic::{monolithic_step, MonolithicSolver};
pub use params::{stabilization_coefficient, MaterialParams, Regime};
pub use system::{build_stabilized_system, relative_difference, DiscreteBiotSystem, ProblemDefinition, SolutionState};

use serde::{Deserialize, Serialize};

use crate::assembly::{assemble_rhs, Scheme};
use crate::coupling::{CoupledSolver, IterationReport, SolverConfig};
use crate::error::{Error, Result};

/// How each time step is solved.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "solver", rename_all = "kebab-case")]
pub enum SolverChoice {
    Monolithic { l: f64 },
    Coupled(SolverConfig),
}

impl SolverChoice {
    pub fn l(&self) -> f64 {
        match self {
            SolverChoice::Monolithic { l } => *l,
            SolverChoice::Coupled(c) => c.l,
        }
    }
}

/// States after each step, in order, with the coupled reports when present.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct Trajectory {
    pub states: Vec<SolutionState>,
    pub reports: Vec<IterationReport>,
}

impl Trajectory {
    pub fn last(&self) -> &SolutionState {
        self.states.last().expect("at least one step")
    }

    pub fn diverged(&self) -> bool {
        self.reports.iter().any(|r| r.diverged)
    }
}

/// Backward Euler over `problem.steps` uniform steps. A coupled run stops at
/// the first step whose iteration fails to converge.
pub fn run_transient(problem: &ProblemDefinition, scheme: Scheme, choice: &SolverChoice) -> Result<Trajectory> {
    problem.validate()?;
    if let SolverChoice::Coupled(cfg) = choice {
        if cfg.scheme != scheme {
            return Err(Error::InvalidParameter(format!(
                "coupled solver configured for {} in a {} run",
                cfg.scheme, scheme
            )));
        }
    }
    let tau = problem.tau();
    let system = build_stabilized_system(problem, scheme, tau, Some(choice.l()))?;
    let mut prev = match &problem.initial {
        Some(s) => {
            if s.u.len() != system.nu() || s.p.len() != system.np() {
                return Err(Error::DimensionMismatch("initial state does not match the spaces".into()));
            }
            s.clone()
        }
        None => SolutionState::zeros(system.nu(), system.np()),
    };
    let t0 = prev.t;
    let mut traj = Trajectory {
        states: Vec::with_capacity(problem.steps),
        reports: Vec::new(),
    };
    match choice {
        SolverChoice::Monolithic { .. } => {
            let solver = MonolithicSolver::with_condensation(&system)?;
            for n in 1..=problem.steps {
                let t = t0 + n as f64 * tau;
                let (f, g) = assemble_rhs(problem, scheme, t).map_err(|e| Error::at_step(n, e))?;
                let next = solver.step(&prev, &f, &g, t).map_err(|e| Error::at_step(n, e))?;
                traj.states.push(next.clone());
                prev = next;
            }
        }
        SolverChoice::Coupled(cfg) => {
            let solver = CoupledSolver::new(&system, *cfg)?;
            for n in 1..=problem.steps {
                let t = t0 + n as f64 * tau;
                let (f, g) = assemble_rhs(problem, scheme, t).map_err(|e| Error::at_step(n, e))?;
                let (next, report) = solver
                    .solve_step(&prev, &f, &g, t, None)
                    .map_err(|e| Error::at_step(n, e))?;
                let stop = report.diverged;
                traj.states.push(next.clone());
                traj.reports.push(report);
                if stop {
                    break;
                }
                prev = next;
            }
        }
    }
    Ok(traj)
}
