//! Experiment harness around the `slpmm` solver: TOML-configured multi-seed
//! runs, Monte-Carlo validation, rate fits and plot tables.

pub mod config;
pub mod error;
pub mod experiment;
pub mod family;
pub mod plotdata;
pub mod rate;
pub mod selftest;
pub mod validate;

pub use config::{ExperimentConfig, Family, ProblemSpec};
pub use error::{HarnessError, Result};
pub use experiment::{run_experiment, ExperimentReport, RunOptions, RunSummary, TraceRow};
pub use family::Problem;
pub use plotdata::emit_plotdata;
pub use rate::{fit_rate, RateFit};
