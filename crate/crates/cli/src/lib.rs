//! Config-driven runs of the emission pipeline with CSV output.

pub mod cache;
pub mod config;
pub mod output;
pub mod run;

pub use config::{parse_config, ConfigError, Mode, Preset, RunConfig};
pub use run::{run, RunOptions, RunOutcome};
