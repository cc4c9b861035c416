//! Iterative coupling: a stabilized flow solve followed by a mechanics solve,
//! repeated until the configured stopping rule fires.
//!
//! The flow operator is `tau A_p + M / beta + gamma1 L M_l - gamma2 L M`.
//! The one-parameter method is the case `gamma1 = gamma, gamma2 = 0`.

use serde::{Deserialize, Serialize};

use crate::assembly::{self, Scheme};
use crate::biot::{stabilization_coefficient, DiscreteBiotSystem, MaterialParams, Regime, SolutionState};
use crate::error::{Error, Result};
use crate::linalg::{norm2, InnerSolver, SkylineCholesky, SparseMatrix, SpdSolver};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "mode", rename_all = "kebab-case")]
pub enum CouplingMode {
    OneParameter { gamma: f64 },
    TwoParameter { gamma1: f64, gamma2: f64 },
}

impl CouplingMode {
    /// `(gamma1, gamma2)`; the one-parameter method has `gamma2 = 0`.
    pub fn gammas(&self) -> (f64, f64) {
        match *self {
            CouplingMode::OneParameter { gamma } => (gamma, 0.0),
            CouplingMode::TwoParameter { gamma1, gamma2 } => (gamma1, gamma2),
        }
    }

    /// Weight of the `Z` seminorm in the contraction quantity.
    pub fn contraction_weight(&self) -> f64 {
        let (g1, g2) = self.gammas();
        (1.0 - g1).abs() / (g1 - g2)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum StopKind {
    /// Euclidean norm of the block residual of the stabilized step.
    Residual,
    /// `||p^i - p^{i-1}|| + ||u^i - u^{i-1}||`.
    Increment,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum StopScale {
    Absolute,
    /// Residuals relative to the residual of the initial guess; increments
    /// relative to `||p^i|| + ||u^i||`.
    Relative,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct StoppingRule {
    pub kind: StopKind,
    pub scale: StopScale,
    pub tol: f64,
}

impl StoppingRule {
    pub fn residual(tol: f64) -> Self {
        StoppingRule {
            kind: StopKind::Residual,
            scale: StopScale::Absolute,
            tol,
        }
    }

    pub fn increment(tol: f64) -> Self {
        StoppingRule {
            kind: StopKind::Increment,
            scale: StopScale::Absolute,
            tol,
        }
    }

    pub fn relative(mut self) -> Self {
        self.scale = StopScale::Relative;
        self
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SolverConfig {
    pub scheme: Scheme,
    /// Stabilization parameter the system is built with.
    pub l: f64,
    pub mode: CouplingMode,
    pub stop: StoppingRule,
    pub max_iterations: usize,
    pub inner: InnerSolver,
}

/// Increment growth over its running minimum that counts as divergence.
pub const DIVERGENCE_FACTOR: f64 = 1e6;

impl SolverConfig {
    pub fn new(scheme: Scheme, l: f64, mode: CouplingMode) -> Self {
        SolverConfig {
            scheme,
            l,
            mode,
            stop: StoppingRule::residual(1e-8),
            max_iterations: 200,
            inner: InnerSolver::Direct,
        }
    }

    pub fn with_stop(mut self, stop: StoppingRule) -> Self {
        self.stop = stop;
        self
    }

    pub fn with_max_iterations(mut self, n: usize) -> Self {
        self.max_iterations = n;
        self
    }

    pub fn with_inner(mut self, inner: InnerSolver) -> Self {
        self.inner = inner;
        self
    }

    /// `omega = (gamma1 - gamma2) L (lambda + 2 mu / d) / alpha^2`.
    pub fn omega(&self, params: &MaterialParams, dim: usize) -> f64 {
        let (g1, g2) = self.mode.gammas();
        (g1 - g2) * self.l * params.constrained_modulus(dim) / (params.alpha * params.alpha)
    }

    /// Whether `gamma1` lies in the interval with a convergence guarantee.
    pub fn in_proven_region(&self) -> bool {
        let (g1, _) = self.mode.gammas();
        g1 > 0.5 && g1 <= 2.0
    }

    pub fn validate(&self) -> Result<()> {
        let (g1, g2) = self.mode.gammas();
        if !(g1 >= 0.0) || !(g2 >= 0.0) || !g1.is_finite() || !g2.is_finite() {
            return Err(Error::InvalidParameter(format!(
                "coupling parameters ({g1}, {g2}) must be finite and nonnegative"
            )));
        }
        if !(self.stop.tol > 0.0) {
            return Err(Error::InvalidParameter(format!(
                "stopping tolerance {} must be positive",
                self.stop.tol
            )));
        }
        if self.max_iterations == 0 {
            return Err(Error::InvalidParameter("iteration cap must be at least 1".into()));
        }
        Ok(())
    }
}

/// Preset stabilization and coupling parameters for which the iteration
/// converges in two steps on the one-dimensional consolidation problem.
///
/// Small storage: P1-P1 uses `gamma = 2/3, L = 3c/2`, MINI uses
/// `gamma = 1, L = c`, with `c = alpha^2 / (lambda + 2 mu / d)`. The general
/// regime adds `1/beta` to `L` and switches to two parameters.
pub fn optimal_parameters(scheme: Scheme, params: &MaterialParams, dim: usize, regime: Regime) -> Result<SolverConfig> {
    let l = stabilization_coefficient(scheme, params, dim, regime)?;
    let c = params.alpha * params.alpha / params.constrained_modulus(dim);
    let mode = match (regime, scheme) {
        (Regime::SmallStorage, Scheme::P1P1) => CouplingMode::OneParameter { gamma: 2.0 / 3.0 },
        (Regime::SmallStorage, Scheme::Mini) => CouplingMode::OneParameter { gamma: 1.0 },
        (Regime::General, Scheme::P1P1) => CouplingMode::TwoParameter {
            gamma1: 1.0 - c / (2.0 * l),
            gamma2: 1.0 - 1.5 * c / l,
        },
        (Regime::General, Scheme::Mini) => CouplingMode::TwoParameter {
            gamma1: 1.0,
            gamma2: params.inv_beta / l,
        },
    };
    Ok(SolverConfig::new(scheme, l, mode))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum StopReason {
    Converged,
    Diverged,
    NonFinite,
    MaxIterations,
}

/// Per-iteration history of one coupled solve.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct IterationReport {
    pub iterations: usize,
    /// Block residual norm after each iteration.
    pub residuals: Vec<f64>,
    pub dp: Vec<f64>,
    pub du: Vec<f64>,
    /// `||e_p||_M^2 + w ||e_p||_Z^2` before the first and after every
    /// iteration, when a reference solution was given.
    pub composite: Vec<f64>,
    pub initial_residual: f64,
    pub converged: bool,
    pub diverged: bool,
    pub reason: StopReason,
}

/// Prepared coupled solver: both SPD operators factored once.
pub struct CoupledSolver<'a> {
    system: &'a DiscreteBiotSystem,
    config: SolverConfig,
    flow_full: SparseMatrix,
    flow: SpdSolver,
    mechanics: SpdSolver,
    /// Lagged pressure operator `(gamma1 - 1) L M_l - (gamma2 - 1) L M`.
    lagged: SparseMatrix,
    /// Operator on the previous pressure `M / beta + gamma1 L M_l - gamma2 L M`.
    memory: SparseMatrix,
}

impl<'a> CoupledSolver<'a> {
    pub fn new(system: &'a DiscreteBiotSystem, config: SolverConfig) -> Result<Self> {
        config.validate()?;
        if config.scheme != system.scheme {
            return Err(Error::InvalidParameter(format!(
                "solver configured for {} but the system is {}",
                config.scheme, system.scheme
            )));
        }
        if !config.in_proven_region() {
            log::warn!(
                "coupling parameter gamma = {} lies outside (1/2, 2]; convergence is not guaranteed",
                config.mode.gammas().0
            );
        }
        let (g1, g2) = config.mode.gammas();
        let l = system.l;
        let beta_inv = system.params.inv_beta;
        let flow_full = SparseMatrix::linear_combination(&[
            (system.tau, &system.a_p),
            (beta_inv, &system.m),
            (g1 * l, &system.m_l),
            (-g2 * l, &system.m),
        ])?;
        let flow_c = assembly::dirichlet_matrix(&flow_full, system.fixed_p());
        let flow = match config.inner {
            InnerSolver::Direct => SpdSolver::Cholesky(Self::factor_flow(&flow_c)?),
            InnerSolver::Cg { .. } => {
                if g2 > 0.0 {
                    Self::factor_flow(&flow_c)?;
                }
                SpdSolver::new(&flow_c, config.inner)?
            }
        };
        let mechanics = SpdSolver::new(system.a_c(), config.inner)?;
        let lagged = SparseMatrix::linear_combination(&[((g1 - 1.0) * l, &system.m_l), (-(g2 - 1.0) * l, &system.m)])?;
        let memory = SparseMatrix::linear_combination(&[
            (beta_inv, &system.m),
            (g1 * l, &system.m_l),
            (-g2 * l, &system.m),
        ])?;
        Ok(CoupledSolver {
            system,
            config,
            flow_full,
            flow,
            mechanics,
            lagged,
            memory,
        })
    }

    fn factor_flow(m: &SparseMatrix) -> Result<SkylineCholesky> {
        SkylineCholesky::factor(m).map_err(|e| match e {
            Error::NotPositiveDefinite { pivot, .. } => Error::FlowOperatorNotSpd { pivot },
            other => other,
        })
    }

    pub fn config(&self) -> &SolverConfig {
        &self.config
    }

    pub fn system(&self) -> &DiscreteBiotSystem {
        self.system
    }

    /// Flow step: new pressure from the previous iterate `(u_it, p_it)`.
    pub fn flow_step(&self, prev: &SolutionState, u_it: &[f64], p_it: &[f64], g: &[f64]) -> Result<Vec<f64>> {
        let sys = self.system;
        let mut rhs: Vec<f64> = g.iter().map(|v| sys.tau * v).collect();
        let du: Vec<f64> = u_it.iter().zip(&prev.u).map(|(a, b)| a - b).collect();
        let dp: Vec<f64> = p_it.iter().zip(&prev.p).map(|(a, b)| a - b).collect();
        sys.d.spmv_add(-1.0, &du, &mut rhs);
        self.lagged.spmv_add(1.0, &dp, &mut rhs);
        self.memory.spmv_add(1.0, &prev.p, &mut rhs);
        let rhs = assembly::dirichlet_rhs(&self.flow_full, &rhs, sys.fixed_p());
        self.flow.solve(&rhs)
    }

    /// Mechanics step: `A u = f - G p` with the displacement constraints.
    pub fn mechanics_step(&self, p: &[f64], f: &[f64]) -> Result<Vec<f64>> {
        let sys = self.system;
        let mut rhs = f.to_vec();
        sys.g.spmv_add(-1.0, p, &mut rhs);
        let rhs = assembly::dirichlet_rhs(&sys.a, &rhs, sys.fixed_u());
        self.mechanics.solve(&rhs)
    }

    fn composite(&self, p: &[f64], reference: &[f64]) -> f64 {
        let e: Vec<f64> = p.iter().zip(reference).map(|(a, b)| a - b).collect();
        let me = self.system.m.spmv(&e);
        let ze = self.system.z.spmv(&e);
        let w = self.config.mode.contraction_weight();
        crate::linalg::dot(&e, &me) + w * crate::linalg::dot(&e, &ze)
    }

    /// Iterates from `(u_prev, p_prev)` until the stopping rule fires.
    ///
    /// `reference` is an exact step solution used only to record the
    /// contraction quantity.
    pub fn solve_step(
        &self,
        prev: &SolutionState,
        f: &[f64],
        g: &[f64],
        t: f64,
        reference: Option<&SolutionState>,
    ) -> Result<(SolutionState, IterationReport)> {
        let sys = self.system;
        if f.len() != sys.nu() || g.len() != sys.np() || prev.u.len() != sys.nu() || prev.p.len() != sys.np() {
            return Err(Error::DimensionMismatch("coupled step inputs do not match the system".into()));
        }
        let flow_rhs = sys.flow_rhs(g, prev);
        let mut u = prev.u.clone();
        let mut p = prev.p.clone();
        // Start from the previous state with the current boundary values.
        for (&d, &v) in sys.fixed_u() {
            u[d] = v;
        }
        for (&d, &v) in sys.fixed_p() {
            p[d] = v;
        }
        let initial_residual = sys.residual_norm(&u, &p, f, &flow_rhs);
        let mut report = IterationReport {
            iterations: 0,
            residuals: Vec::new(),
            dp: Vec::new(),
            du: Vec::new(),
            composite: Vec::new(),
            initial_residual,
            converged: false,
            diverged: false,
            reason: StopReason::MaxIterations,
        };
        if let Some(r) = reference {
            report.composite.push(self.composite(&p, &r.p));
        }
        let stop = self.config.stop;
        let mut min_increment = f64::INFINITY;
        for it in 1..=self.config.max_iterations {
            let p_new = self.flow_step(prev, &u, &p, g)?;
            let u_new = self.mechanics_step(&p_new, f)?;
            let dp = norm2(&p_new.iter().zip(&p).map(|(a, b)| a - b).collect::<Vec<_>>());
            let du = norm2(&u_new.iter().zip(&u).map(|(a, b)| a - b).collect::<Vec<_>>());
            u = u_new;
            p = p_new;
            let res = sys.residual_norm(&u, &p, f, &flow_rhs);
            report.iterations = it;
            report.residuals.push(res);
            report.dp.push(dp);
            report.du.push(du);
            if let Some(r) = reference {
                report.composite.push(self.composite(&p, &r.p));
            }

            let increment = dp + du;
            if !increment.is_finite() || !res.is_finite() {
                report.diverged = true;
                report.reason = StopReason::NonFinite;
                break;
            }
            let measure = match (stop.kind, stop.scale) {
                (StopKind::Residual, StopScale::Absolute) => res,
                (StopKind::Residual, StopScale::Relative) => res / initial_residual.max(f64::MIN_POSITIVE),
                (StopKind::Increment, StopScale::Absolute) => increment,
                (StopKind::Increment, StopScale::Relative) => {
                    increment / (norm2(&p) + norm2(&u)).max(f64::MIN_POSITIVE)
                }
            };
            if measure <= stop.tol {
                report.converged = true;
                report.reason = StopReason::Converged;
                break;
            }
            min_increment = min_increment.min(increment);
            if increment > DIVERGENCE_FACTOR * min_increment {
                report.diverged = true;
                report.reason = StopReason::Diverged;
                break;
            }
        }
        if !report.converged && report.reason == StopReason::MaxIterations {
            report.diverged = true;
        }
        Ok((SolutionState { u, p, t }, report))
    }
}

/// Free-function form of [`CoupledSolver::flow_step`].
pub fn flow_step(
    system: &DiscreteBiotSystem,
    prev: &SolutionState,
    u_it: &[f64],
    p_it: &[f64],
    g: &[f64],
    config: &SolverConfig,
) -> Result<Vec<f64>> {
    CoupledSolver::new(system, *config)?.flow_step(prev, u_it, p_it, g)
}

/// Free-function form of [`CoupledSolver::mechanics_step`].
pub fn mechanics_step(system: &DiscreteBiotSystem, p: &[f64], f: &[f64]) -> Result<Vec<f64>> {
    SpdSolver::new(system.a_c(), InnerSolver::Direct)?.solve(&assembly::dirichlet_rhs(
        &system.a,
        &{
            let mut rhs = f.to_vec();
            system.g.spmv_add(-1.0, p, &mut rhs);
            rhs
        },
        system.fixed_u(),
    ))
}

/// Runs one coupled step with a freshly prepared solver.
pub fn solve_coupled_step(
    system: &DiscreteBiotSystem,
    prev: &SolutionState,
    f: &[f64],
    g: &[f64],
    t: f64,
    config: &SolverConfig,
) -> Result<(SolutionState, IterationReport)> {
    CoupledSolver::new(system, *config)?.solve_step(prev, f, g, t, None)
}
