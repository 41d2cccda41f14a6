//! Benchmark runner for `mini-gp`: TOML-configured sweeps over
//! hyperparameters and seeds, per-step CSV export, summary JSON with
//! confidence bands, a best-combination report, and SVG plots.

pub mod config;
pub mod error;
pub mod experiment;
pub mod output;
pub mod plot;
pub mod runner;
pub mod summary;
pub mod sweep;

pub use config::{oracle_lambda, Algorithm, ExperimentConfig, LambdaMode, Overrides, UcbRule, DEFAULT_CONFIG};
pub use error::{HarnessError, Result};
pub use experiment::{run_experiment, ExperimentOutput, Manifest, Report, RunOptions};
pub use summary::SummaryDoc;
pub use sweep::{combinations, Combination, Params, SweepMode};
