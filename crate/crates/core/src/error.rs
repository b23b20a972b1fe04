use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("singular matrix (rank defect {defect})")]
    Singular { defect: usize },

    #[error("dimension mismatch: {0}")]
    Dimension(String),

    #[error("pair is not separating: diagonal coefficient vanishes at i = {i}")]
    NotSeparating { i: usize },

    #[error("precondition violated: {0}")]
    Precondition(String),

    #[error("inconsistent linear system (residual {residual:.3e})")]
    Inconsistent { residual: f64 },

    #[error("degenerate change of variables: sum of coordinates vanishes")]
    DegenerateU,

    #[error("kernel pair is not admissible: both polynomials vanish at z_{s}")]
    NotAdmissible { s: usize },

    #[error("malformed kernel pair: {0}")]
    MalformedPair(String),

    #[error("point {index} is not simple (multiplicity {multiplicity})")]
    NonSimplePoint { index: usize, multiplicity: usize },

    #[error("singular Jacobian at point {index}")]
    SingularJacobian { index: usize },

    #[error("ambiguous eigenvalue clustering: clusters {gap:.3e} apart")]
    ClusterAmbiguity { gap: f64 },

    #[error("verification of {what} failed (residual {residual:.3e})")]
    Verification { what: String, residual: f64 },

    #[error("invalid config: {0}")]
    Config(String),
}
