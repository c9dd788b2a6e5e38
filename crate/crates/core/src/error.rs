use thiserror::Error;

/// Errors raised by the scheduling toolkit.
#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("invalid parameter `{name}`: {reason}")]
    InvalidParameter { name: &'static str, reason: String },

    #[error("policy shape mismatch: {0}")]
    Shape(String),

    #[error("probability out of range in row {row}: {value}")]
    ProbabilityRange { row: usize, value: f64 },

    #[error("row {row} sums to {sum} > 1")]
    RowSum { row: usize, sum: f64 },

    #[error("quantile requested at p = 1 on an unbounded support")]
    UnboundedSupport,

    #[error("quadrature did not converge: estimated error {estimate:e} exceeds tolerance {tolerance:e}")]
    Quadrature { estimate: f64, tolerance: f64 },

    #[error("steady-state system is singular (reducible or degenerate chain)")]
    Reducible,

    #[error("policy never schedules a packet; the virtual-user distribution is undefined")]
    NeverSchedules,

    #[error("energy integral diverges: the lowest scheduling threshold is zero")]
    Divergent,

    #[error("estimation error variance is infeasible: 1 - beta2 * sum(rho/h) = {margin}")]
    InfeasibleErrorVariance { margin: f64 },

    #[error("the CSO energy requires error-free transmission (nu_d = 0), got nu_d = {0}")]
    LossyTransmission(f64),

    #[error("config error: {0}")]
    Config(String),

    #[error("io error: {0}")]
    Io(String),
}

pub type Result<T> = std::result::Result<T, Error>;

impl From<std::io::Error> for Error {
    fn from(e: std::io::Error) -> Self {
        Error::Io(e.to_string())
    }
}

pub(crate) fn invalid(name: &'static str, reason: impl Into<String>) -> Error {
    Error::InvalidParameter {
        name,
        reason: reason.into(),
    }
}
