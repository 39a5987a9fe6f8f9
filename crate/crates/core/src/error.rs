use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("network must contain at least one user")]
    EmptyNetwork,

    #[error("dimension mismatch: expected {expected} entries, got {actual}")]
    Dimension { expected: usize, actual: usize },

    #[error("user index {user} outside [1, {n}]")]
    UserOutOfRange { user: usize, n: usize },

    #[error("arrival rate {value} on link {link} outside [0, 1]")]
    RateOutOfRange { link: usize, value: f64 },

    #[error("capacity load is zero; expansion factor undefined")]
    ZeroLoad,

    #[error("probability {0} outside the open interval (0, 1)")]
    ProbabilityDomain(f64),

    #[error("invalid access distribution: {0}")]
    AccessDistribution(String),

    #[error("saturated clique: total arrival rate {0} >= 1")]
    SaturatedClique(f64),

    #[error("invalid parameter: {0}")]
    InvalidParameter(String),
}
