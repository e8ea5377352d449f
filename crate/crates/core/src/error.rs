use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("t = {t} lies below the tail anchor t0 = {t0}; use the body CDF")]
    OutOfDomain { t: f64, t0: f64 },

    #[error("derivative order {requested} exceeds the declared smoothness order {available}")]
    InsufficientSmoothness { requested: usize, available: usize },

    #[error("weight c = 0 is degenerate")]
    DegenerateWeight,

    #[error("negative scale {0} needs a lower tail, but the distribution is one-sided")]
    UnsupportedSign(f64),

    #[error("invalid model: {0}")]
    InvalidModel(String),

    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("hypothesis outside supported scope: {0}")]
    OutOfScope(String),

    #[error("limsup condition t h(t)^2 / h(1/h(t)) < inf appears violated: {0}")]
    CaseAConditionViolated(String),

    #[error("character orders differ: {left} vs {right}")]
    OrderMismatch { left: usize, right: usize },

    #[error("{requested} moments requested, only {available} available")]
    InsufficientMoments { requested: usize, available: usize },

    #[error("moment of order {0} is not finite")]
    NonFiniteMoment(usize),

    #[error("weight sequence is empty")]
    EmptySequence,

    #[error("index {0} is not present in the weight sequence")]
    IndexAbsent(i64),

    #[error("quadrature did not reach tolerance {requested:e}; achieved {achieved:e}")]
    Tolerance { requested: f64, achieved: f64 },
}
