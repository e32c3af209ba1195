use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("{name} must be {requirement}, got {value}")]
    Domain {
        name: &'static str,
        requirement: &'static str,
        value: f64,
    },

    #[error("invalid parameter set: {0}")]
    Invalid(String),

    #[error("no root below the band edge for mode {mode} (target cos = {target})")]
    BandEdgeExceeded { mode: i64, target: f64 },

    #[error("superconducting regime violated in {wire}: |I| = {current} A exceeds I* = {limit} A")]
    Regime {
        wire: &'static str,
        current: f64,
        limit: f64,
    },

    #[error("finite-difference extrapolation did not converge (last relative change {0:e})")]
    Precision(f64),

    #[error("ill-conditioned normal equations: {0}")]
    Conditioning(String),

    #[error("no resonance found in trace: {0}")]
    NoResonance(String),
}

pub type Result<T> = std::result::Result<T, Error>;

pub(crate) fn require_positive(name: &'static str, value: f64) -> Result<f64> {
    if value.is_finite() && value > 0.0 {
        Ok(value)
    } else {
        Err(Error::Domain {
            name,
            requirement: "finite and > 0",
            value,
        })
    }
}

pub(crate) fn require_non_negative(name: &'static str, value: f64) -> Result<f64> {
    if value.is_finite() && value >= 0.0 {
        Ok(value)
    } else {
        Err(Error::Domain {
            name,
            requirement: "finite and >= 0",
            value,
        })
    }
}

pub(crate) fn require_fraction(name: &'static str, value: f64) -> Result<f64> {
    if (0.0..=1.0).contains(&value) {
        Ok(value)
    } else {
        Err(Error::Domain {
            name,
            requirement: "within [0, 1]",
            value,
        })
    }
}
