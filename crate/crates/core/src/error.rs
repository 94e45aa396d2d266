use thiserror::Error;

/// Errors raised by the graph, spectral, Lyapunov and simulation layers.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("invalid graph: {0}")]
    InvalidGraph(String),

    #[error("graph is not connected")]
    NotConnected,

    #[error("graph is structurally unbalanced; a gauge transformation does not exist")]
    NotStructurallyBalanced,

    #[error("matrix is not symmetric (max |A - A^T| = {max_asymmetry:e})")]
    NotSymmetric { max_asymmetry: f64 },

    #[error("matrix has a negative eigenvalue {value:e}")]
    NegativeEigenvalue { value: f64 },

    #[error("{what} is not positive definite (lambda_min = {lambda_min:e})")]
    NotPositiveDefinite { what: &'static str, lambda_min: f64 },

    #[error("edge Laplacian is singular (lambda_min = {lambda_min:e}); the graph is not a spanning tree")]
    SingularEdgeLaplacian { lambda_min: f64 },

    #[error("deflated matrix is singular (lambda_min = {lambda_min:e}); a zero eigenvector was not deflated")]
    DeflationInsufficient { lambda_min: f64 },

    #[error("dimension mismatch for {what}: expected {expected}, found {found}")]
    DimensionMismatch {
        what: &'static str,
        expected: usize,
        found: usize,
    },

    #[error("{what} must be positive, got {value}")]
    NonpositiveInput { what: &'static str, value: f64 },

    #[error("illegal transition: {0}")]
    IllegalTransition(String),

    #[error("non-monotone schedule: {0}")]
    NonMonotoneSchedule(String),

    #[error("missing initial state for joining node `{0}`")]
    MissingInitialState(String),

    #[error("numerical failure: {0}")]
    Numerical(String),
}

pub type Result<T> = std::result::Result<T, Error>;
