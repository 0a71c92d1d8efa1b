//! Configuration-driven verification runs over `isoflow-core`.

pub mod config;
pub mod run;

pub use config::{parse_config, ConfigError, ConfigErrors, RunConfig};
pub use run::{execute, run, Report};
