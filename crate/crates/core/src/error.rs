use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("log-gamma pole at z = {re} + {im}i")]
    GammaPole { re: f64, im: f64 },

    #[error("series diverges: p = 1 and xi = {xi} lies on 2*pi*Z")]
    Divergent { xi: f64 },

    #[error("invalid argument `{name}`: {reason}")]
    InvalidArgument { name: &'static str, reason: String },

    #[error("position x = {x} outside [0, {length}]")]
    OutOfDomain { x: f64, length: f64 },

    #[error("log-space magnitude {0} exceeds the representable range")]
    Overflow(f64),

    #[error("step size rejected: {0}")]
    StepRejected(String),

    #[error("ill-conditioned projection: |zeta+|^2 - |zeta-|^2 - 1 = {0:e}")]
    IllConditioned(f64),

    #[error("ladder integration became unstable at t = {t}: energy ratio {ratio:e}")]
    Unstable { t: f64, ratio: f64 },

    #[error("time {t} is not covered by trajectory spanning [{start}, {end}]")]
    NotCovered { t: f64, start: f64, end: f64 },
}

pub type Result<T> = std::result::Result<T, Error>;

pub(crate) fn invalid(name: &'static str, reason: impl Into<String>) -> Error {
    Error::InvalidArgument {
        name,
        reason: reason.into(),
    }
}
