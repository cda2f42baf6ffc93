//! Spontaneous emission of a single photon on the hydrogen 2p-1s line:
//! decay amplitudes, the photon energy density in position space and its
//! far-field power law.

pub mod asymptotics;
pub mod coupling;
pub mod error;
pub mod field;
mod interp;
pub mod oscillatory;
pub mod quadrature;
pub mod solver;
pub mod special;
pub mod units;
pub mod validation;

pub use error::{Error, Result};

/// Crate version, recorded in run metadata.
pub const VERSION: &str = env!("CARGO_PKG_VERSION");
