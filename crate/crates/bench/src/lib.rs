//! Experiment harness for the `tubal` solvers: TOML run configs, built-in
//! presets, parallel execution and CSV traces.

pub mod config;
pub mod diag;
pub mod error;
pub mod output;
pub mod presets;
pub mod runner;

pub use config::{RunConfig, Sweep, SweepAxis};
pub use error::BenchError;
pub use runner::{run_config, Mode};
