use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("dimension mismatch: expected {expected}, got {got}")]
    DimensionMismatch { expected: usize, got: usize },

    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("point outside the domain: {0}")]
    OutsideDomain(String),

    #[error("subspace basis is rank deficient (rank {rank} of {expected})")]
    RankDeficient { rank: usize, expected: usize },

    #[error("subspace of dimension {dim} is not half-dimensional in R^{ambient}")]
    NotHalfDimensional { dim: usize, ambient: usize },

    #[error("form is degenerate (smallest singular value {0:e})")]
    DegenerateForm(f64),

    #[error("quadrature did not converge after {refinements} refinements (last relative change {change:e})")]
    QuadratureNotConverged { refinements: usize, change: f64 },

    #[error("constraint projection did not converge (residual {residual:e} after {iterations} iterations)")]
    ProjectionFailed { residual: f64, iterations: usize },

    #[error("vector field evaluation failed: {0}")]
    FieldFailure(String),

    #[error("flow undefined at the zero covector")]
    ZeroCovector,

    #[error("point violates an invariant: {0}")]
    InvariantViolated(String),

    #[error("vectors are not tangent: {0}")]
    NotTangent(String),
}
