use num_complex::Complex64;
use thiserror::Error;

#[derive(Debug, Clone, Error, PartialEq)]
pub enum Error {
    #[error("magnetic quantum number {0} is not one of -1, 0, +1")]
    InvalidMagneticNumber(i32),

    #[error("{what} out of range: {value}")]
    OutOfRange { what: &'static str, value: f64 },

    #[error("unsupported angular index {what} = {value}")]
    UnsupportedIndex { what: &'static str, value: i32 },

    #[error(
        "quadrature did not converge ({context}): partial value {partial}, error estimate {estimate:e} after {panels} panels"
    )]
    NonConvergence {
        context: String,
        partial: Complex64,
        estimate: f64,
        panels: usize,
    },

    #[error("principal value unstable at omega = {omega:e}: windows disagree by {relative_gap:e} (relative)")]
    PrincipalValueUnstable { omega: f64, relative_gap: f64 },

    #[error("all {supplied} endpoint derivatives vanish; the integral decays faster than r'^-{supplied}")]
    FasterDecay { supplied: usize },

    #[error("physical units need an atom; this spectrum is in scaled units only")]
    PhysicalUnitsUnavailable,

    #[error("power-law fit rejected: {0}")]
    InsufficientData(String),
}

pub type Result<T> = std::result::Result<T, Error>;

pub(crate) fn check_finite_nonneg(what: &'static str, value: f64) -> Result<f64> {
    if value.is_finite() && value >= 0.0 {
        Ok(value)
    } else {
        Err(Error::OutOfRange { what, value })
    }
}

pub(crate) fn check_positive(what: &'static str, value: f64) -> Result<f64> {
    if value.is_finite() && value > 0.0 {
        Ok(value)
    } else {
        Err(Error::OutOfRange { what, value })
    }
}
