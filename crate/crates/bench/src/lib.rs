//! Experiment harness for the `mps-core` controllers: TOML configs, seeded
//! Monte-Carlo sweeps, CSV output and the `mps-bench` command line.

#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod cli;
pub mod config;
pub mod error;
pub mod output;
pub mod sweep;

pub use config::{Experiment, ExperimentConfig, MatrixSpec, NamedManeuver};
pub use error::{exit_code, BenchError, Result};
pub use sweep::{run_sweep, CellOutcome, SweepReport};
