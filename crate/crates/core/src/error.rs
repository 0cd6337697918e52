//! Error type shared by all simulator modules.

use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("digit {digit} out of range for qudit dimension {dim}")]
    DigitOutOfRange { digit: usize, dim: usize },

    #[error("assignment has {got} digits, register has {expected} qudits")]
    AssignmentLength { got: usize, expected: usize },

    #[error("basis index {index} out of range for register of size {size}")]
    IndexOutOfRange { index: usize, size: usize },

    #[error("register dimension {dim}^{num_qudits} exceeds the state-vector limit {limit}")]
    DimensionLimit {
        dim: usize,
        num_qudits: usize,
        limit: u64,
    },

    #[error("qudit dimension must be at least 2, got {0}")]
    InvalidDimension(usize),

    #[error("register mismatch: {0}")]
    RegisterMismatch(String),

    #[error("state is not normalized (norm = {norm})")]
    UnnormalizedState { norm: f64 },

    #[error("operator is not Hermitian (max |M - M^dag| = {residual:.3e})")]
    NotHermitian { residual: f64 },

    #[error("eigendecomposition residual {residual:.3e} above tolerance {tol:.1e}")]
    EigensolverFailure { residual: f64, tol: f64 },

    #[error("operator dimension {op_dim} does not match qudit dimension {qudit_dim}")]
    OperatorDimension { op_dim: usize, qudit_dim: usize },

    #[error("encoding error: {0}")]
    Encoding(String),

    #[error("constraint error: {0}")]
    Constraint(String),

    #[error("no basis state satisfies all equality constraints")]
    InfeasibleConstraints,

    #[error("evolution collapsed: feasible overlap {overlap:.3e} below threshold")]
    DegenerateEvolution { overlap: f64 },

    #[error("trajectory error: {0}")]
    Trajectory(String),

    #[error("unsupported: {0}")]
    Unsupported(String),

    #[error("consistency error: {0}")]
    Consistency(String),
}
