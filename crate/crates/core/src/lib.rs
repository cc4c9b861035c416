//! Stabilized finite elements and iterative coupling for quasi-static Biot
//! poroelasticity.

#![allow(clippy::neg_cmp_op_on_partial_ord, clippy::needless_range_loop)]

pub mod assembly;
pub mod benchmarks;
pub mod biot;
pub mod coupling;
pub mod error;
pub mod linalg;
pub mod mesh;
pub mod verify;

pub use assembly::{BoundaryConditions, FeSpace, Scheme, SourceTerms};
pub use biot::{
    build_stabilized_system, run_transient, DiscreteBiotSystem, MaterialParams, ProblemDefinition, Regime,
    SolutionState, SolverChoice, Trajectory,
};
pub use coupling::{optimal_parameters, CoupledSolver, CouplingMode, IterationReport, SolverConfig, StoppingRule};
pub use error::{Error, Result};
pub use linalg::{BlockOperator, InnerSolver, SparseMatrix};
pub use mesh::{ElementGeometry, Mesh, Side};
