//! File formats, experiment harness and plotting for `jsrec-core`.
//!
//! - [`io`]: matrix CSV files and result tables.
//! - [`config`]: JSON experiment descriptions.
//! - [`experiment`]: seeded, parallel Monte-Carlo runs producing
//!   `results.csv`, `config.echo.json` and `plot.svg`.
//! - [`plot`]: deterministic SVG line plots.

pub mod config;
pub mod experiment;
pub mod io;
pub mod plot;

pub use config::{ConfigError, ExperimentConfig, ExperimentKind};
pub use experiment::{run_experiment, ExperimentOutput, ResultRow};
