use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("invalid grid: {0}")]
    InvalidGrid(String),

    #[error("index range [{lo}, {hi}] outside grid with {len} nodes")]
    IndexOutOfRange { lo: usize, hi: usize, len: usize },

    #[error("grid mismatch: expected {expected} nodes, got {actual}")]
    GridMismatch { expected: usize, actual: usize },

    #[error("invalid parameter `{key}`: {reason}")]
    InvalidParameter { key: String, reason: String },

    #[error("kernel sample is not finite at ({xi}, {eta})")]
    NonFiniteKernel { xi: f64, eta: f64 },

    #[error("cross approximation did not reach eps={eps:e} within rank {rank_cap} (residual {residual:e})")]
    RankCapExhausted { eps: f64, rank_cap: usize, residual: f64 },

    #[error("non-finite value at node {node} (step {step}, tau={tau})")]
    NonFinite { node: usize, step: usize, tau: f64 },

    #[error("supersaturation exhausted: delta={delta} at step {step} (tau={tau}); fractional gamma requires delta >= 0")]
    Exhausted { delta: f64, step: usize, tau: f64 },

    #[error("analytic solution domain error: {0}")]
    OracleDomain(String),

    #[error("time {t} beyond tabulated range [0, {tau_max}]; extend the parameter grid toward b=0")]
    OracleRange { t: f64, tau_max: f64 },

    #[error("config line {line}: {msg}")]
    ConfigParse { line: usize, msg: String },

    #[error("{0}")]
    Unsupported(String),

    #[error("i/o error: {0}")]
    Io(String),
}

impl From<std::io::Error> for Error {
    fn from(e: std::io::Error) -> Self {
        Error::Io(e.to_string())
    }
}

impl Error {
    pub(crate) fn param(key: &str, reason: impl Into<String>) -> Self {
        Error::InvalidParameter {
            key: key.to_string(),
            reason: reason.into(),
        }
    }

    /// Process exit code used by the `solver` binary.
    pub fn exit_code(&self) -> i32 {
        match self {
            Error::ConfigParse { .. } | Error::InvalidParameter { .. } | Error::InvalidGrid(_) => 2,
            Error::NonFinite { .. } | Error::Exhausted { .. } => 3,
            Error::OracleDomain(_) | Error::OracleRange { .. } => 4,
            Error::Unsupported(_) => 2,
            _ => 1,
        }
    }
}
