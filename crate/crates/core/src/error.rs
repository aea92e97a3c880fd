use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("dimension mismatch in {what}: expected {expected}, found {found}")]
    DimensionMismatch {
        what: &'static str,
        expected: usize,
        found: usize,
    },

    #[error("{what} is not symmetric (max asymmetry {asymmetry:e})")]
    NotSymmetric { what: &'static str, asymmetry: f64 },

    #[error("{what} value {value} is outside the domain of the canonical function")]
    Domain { what: &'static str, value: f64 },

    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    /// The dual point lies where the stationary x of the complementarity
    /// function is not unique.
    #[error("G is singular (smallest singular value {min_singular:e} below {threshold:e})")]
    SingularG { min_singular: f64, threshold: f64 },

    #[error("no seed converged: {0}")]
    NoConvergence(String),

    #[error("{m} inequality constraints exceed the active-set enumeration cap of {cap}")]
    ActiveSetExplosion { m: usize, cap: usize },

    #[error("no grid point satisfies the constraints ({evaluated} points evaluated)")]
    NoFeasiblePoint { evaluated: usize },

    #[error("grid of {points} points exceeds the limit of {limit}")]
    GridTooLarge { points: f64, limit: f64 },

    #[error("certification contradicted: {0}")]
    CertificationContradicted(String),

    #[error("unsupported: {0}")]
    Unsupported(String),
}
