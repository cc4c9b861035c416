use thiserror::Error;

use crate::mesh::Side;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid mesh request: {0}")]
    InvalidMesh(String),

    #[error("element {id} out of range (mesh has {count} elements)")]
    ElementOutOfRange { id: usize, count: usize },

    #[error("side {side:?} does not exist in dimension {dim}")]
    UnknownSide { side: Side, dim: usize },

    #[error("degenerate element {0} (zero volume)")]
    DegenerateElement(usize),

    #[error("entry ({row}, {col}) out of range for a {rows}x{cols} matrix")]
    IndexOutOfRange {
        row: usize,
        col: usize,
        rows: usize,
        cols: usize,
    },

    #[error("dimension mismatch: {0}")]
    DimensionMismatch(String),

    #[error("{rows}x{cols} matrix exceeds the dense conversion guard")]
    TooLargeForDense { rows: usize, cols: usize },

    #[error("conjugate gradient stopped after {iterations} iterations at relative residual {residual:e}")]
    NotConverged { iterations: usize, residual: f64 },

    #[error("matrix is singular (zero pivot at row {pivot})")]
    Singular { pivot: usize },

    #[error("matrix is not positive definite (pivot {pivot} = {value:e})")]
    NotPositiveDefinite { pivot: usize, value: f64 },

    #[error("conflicting essential constraints on dof {dof}: {first} vs {second}")]
    ConflictingConstraint { dof: usize, first: f64, second: f64 },

    #[error("point source at {0:?} lies outside the domain")]
    SourceOutsideDomain(Vec<f64>),

    #[error("load patch is not aligned with the mesh: {0}")]
    PatchMisaligned(String),

    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("flow operator of the two-parameter splitting is not positive definite (pivot {pivot})")]
    FlowOperatorNotSpd { pivot: usize },

    #[error("time step {step}: {source}")]
    AtStep {
        step: usize,
        #[source]
        source: Box<Error>,
    },

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Csv(#[from] csv::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

impl Error {
    pub(crate) fn at_step(step: usize, err: Error) -> Self {
        Error::AtStep {
            step,
            source: Box::new(err),
        }
    }
}
