use thiserror::Error;

/// Errors surfaced by the library.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("domain error: {0}")]
    Domain(String),

    #[error("root not bracketed on [{lo}, {hi}]: f(lo) = {f_lo:e}, f(hi) = {f_hi:e}")]
    NoBracket { lo: f64, hi: f64, f_lo: f64, f_hi: f64 },

    #[error("iteration did not converge: {0}")]
    NoConvergence(String),

    #[error("coefficient overflow for term n = {n}: exponent {exponent:.3} exceeds the safe range")]
    CoefficientOverflow { n: i64, exponent: f64 },

    #[error("invalid kernel: {0}")]
    InvalidKernel(String),

    #[error("invalid problem: {0}")]
    InvalidProblem(String),

    #[error("singular iteration matrix")]
    Singular,

    #[error("lookup at t = {t} is outside the covered range [{lo}, {hi}]")]
    OutOfRange { t: f64, lo: f64, hi: f64 },

    #[error("maximum number of steps ({0}) exceeded")]
    MaxStepsExceeded(usize),

    #[error("step size too small (h = {h:e} at t = {t})")]
    StepSizeTooSmall { t: f64, h: f64 },

    #[error("Newton iteration failed repeatedly at t = {t}")]
    NewtonFailure { t: f64 },

    #[error("non-finite state at t = {t}")]
    NonFinite { t: f64 },
}

pub type Result<T> = std::result::Result<T, Error>;

pub(crate) fn domain(msg: impl Into<String>) -> Error {
    Error::Domain(msg.into())
}
