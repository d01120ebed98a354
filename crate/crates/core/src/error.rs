use num_complex::Complex64;
use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("invalid parameter `{name}`: {reason}")]
    Param { name: &'static str, reason: String },

    #[error("point {xi} outside the domain of psi: {bound}")]
    Domain { xi: Complex64, bound: String },

    #[error("admissibility violated at q={q}, xi={xi}: {reason}")]
    Admissibility {
        q: Complex64,
        xi: Complex64,
        reason: String,
    },

    #[error("non-finite integrand value at node {index}")]
    NonFinite { index: i64 },

    #[error("resonant grid: |exp(i a zeta) - 1| = {gap:e} below threshold")]
    Resonance { gap: f64 },

    #[error("unsupported regime: {0}")]
    Regime(String),

    #[error("singular node: q + psi(xi) = 0 at xi={xi}")]
    Singular { xi: Complex64 },

    #[error("tolerance {target:e} not reached: value {value}, error estimate {achieved:e}")]
    Tolerance { value: f64, achieved: f64, target: f64 },

    #[error("step sampler: {0}")]
    Sampler(String),

    #[error("{0}")]
    Config(String),
}

pub type Result<T> = std::result::Result<T, Error>;

pub(crate) fn param(name: &'static str, reason: impl Into<String>) -> Error {
    Error::Param {
        name,
        reason: reason.into(),
    }
}
