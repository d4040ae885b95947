use thiserror::Error;

pub type Result<T> = std::result::Result<T, LdpError>;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum LdpError {
    #[error("time must be positive, got {0}")]
    NonPositiveTime(f64),

    #[error("quadrature did not reach tolerance: estimate {estimate}, error {error}, {intervals} intervals")]
    QuadratureFailure {
        estimate: f64,
        error: f64,
        intervals: usize,
    },

    #[error("integrand is not integrable at 0: {0}")]
    NonIntegrable(String),

    #[error("invalid Potter exponent delta={delta} for index beta={beta}")]
    InvalidDelta { delta: f64, beta: f64 },

    #[error("derivative of the slowly varying factor is required but absent")]
    MissingDerivative,

    #[error("variance must be positive, got {value} at eps={eps}")]
    NonPositiveVariance { eps: f64, value: f64 },

    #[error("mixing measure has zero total mass")]
    EmptyMeasure,

    #[error("invalid mixing measure: {0}")]
    InvalidMeasure(String),

    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("kernel family is not classified: {0}")]
    Unclassified(String),

    #[error("monotonicity of h^2 near 0 is inconclusive: {0}")]
    UnclassifiedMonotonicity(String),

    #[error("matrix is not positive semidefinite: min eigenvalue {min_eig}, max eigenvalue {max_eig}")]
    PsdViolation { min_eig: f64, max_eig: f64 },

    #[error("Cholesky factorization failed with jitter up to {jitter}")]
    FactorizationFailure { jitter: f64 },

    #[error("variance {0} is degenerate for tail evaluation")]
    DegenerateVariance(f64),

    #[error("only {hits} hits out of {n_paths} paths, need at least {required}")]
    InsufficientHits {
        hits: usize,
        n_paths: usize,
        required: usize,
    },

    #[error("invalid grid: {0}")]
    InvalidGrid(String),

    #[error("point ({s}, {t}) lies outside the kernel domain")]
    OutOfDomain { s: f64, t: f64 },

    #[error("limit kernel {0} is not the covariance of a continuous process")]
    DiscontinuousLimit(String),

    #[error("dimension mismatch: expected {expected}, got {got}")]
    DimensionMismatch { expected: usize, got: usize },

    #[error("non-finite value encountered: {0}")]
    NonFinite(String),

    #[error("io error: {0}")]
    Io(String),

    #[error("parse error: {0}")]
    Parse(String),
}

impl From<std::io::Error> for LdpError {
    fn from(e: std::io::Error) -> Self {
        LdpError::Io(e.to_string())
    }
}

impl From<csv::Error> for LdpError {
    fn from(e: csv::Error) -> Self {
        LdpError::Parse(e.to_string())
    }
}

impl LdpError {
    /// Numerical failures, as opposed to bad input.
    pub fn is_numerical(&self) -> bool {
        matches!(
            self,
            LdpError::QuadratureFailure { .. }
                | LdpError::PsdViolation { .. }
                | LdpError::FactorizationFailure { .. }
                | LdpError::NonFinite(_)
                | LdpError::DegenerateVariance(_)
                | LdpError::NonPositiveVariance { .. }
        )
    }
}
