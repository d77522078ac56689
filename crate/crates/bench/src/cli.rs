//! Command-line interface of `mps-bench`.

use std::fs;
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand};
use mps_core::{run_maneuver, ControllerKind};

use crate::config::{Experiment, ExperimentConfig};
use crate::error::{BenchError, Result};
use crate::output;
use crate::sweep::run_sweep;

#[derive(Debug, Parser)]
#[command(
    name = "mps-bench",
    version,
    about = "Closed-loop attitude maneuvers: benchmark vs MPS"
)]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Fly one maneuver with one controller and write its trajectory CSV.
    Run {
        #[command(flatten)]
        common: CommonArgs,
        /// Maneuver id from the config (defaults to the first one).
        #[arg(long)]
        maneuver: Option<String>,
        /// continuous, benchmark or mps.
        #[arg(long, default_value = "mps")]
        controller: String,
    },
    /// Monte-Carlo sweep of every maneuver under the baseline and candidate.
    Sweep {
        #[command(flatten)]
        common: CommonArgs,
        /// Worker threads (0 = one per core).
        #[arg(long, default_value_t = 0)]
        jobs: usize,
    },
    /// Parse and check a config without running anything.
    Validate {
        #[command(flatten)]
        common: CommonArgs,
    },
}

#[derive(Debug, Args)]
pub struct CommonArgs {
    /// Experiment TOML; the built-in flight-test config when omitted.
    #[arg(long, value_name = "PATH")]
    pub config: Option<PathBuf>,
    /// Output directory, overriding `output_dir`.
    #[arg(long, value_name = "DIR")]
    pub out: Option<PathBuf>,
    /// Base seed, overriding `seed`.
    #[arg(long)]
    pub seed: Option<u64>,
    /// Trials per cell, overriding `trials`.
    #[arg(long)]
    pub trials: Option<usize>,
}

impl CommonArgs {
    pub fn experiment(&self) -> Result<Experiment> {
        let mut cfg = match &self.config {
            Some(path) => ExperimentConfig::load(path)?,
            None => ExperimentConfig::flight_test(),
        };
        if let Some(out) = &self.out {
            cfg.output_dir = out.clone();
        }
        if let Some(seed) = self.seed {
            cfg.seed = seed;
        }
        if let Some(trials) = self.trials {
            cfg.trials = trials;
        }
        cfg.validate()
    }
}

fn create_dir(dir: &Path) -> Result<()> {
    fs::create_dir_all(dir).map_err(|e| BenchError::io(dir, e))
}

/// Runs a parsed command line and returns what should go to stdout.
pub fn execute(cli: &Cli) -> Result<String> {
    match &cli.command {
        Command::Validate { common } => {
            let exp = common.experiment()?;
            Ok(format!(
                "config ok: {} maneuvers, {} trials, {} vs {}\n",
                exp.maneuvers.len(),
                exp.trials,
                exp.baseline,
                exp.candidate
            ))
        }
        Command::Run {
            common,
            maneuver,
            controller,
        } => {
            let exp = common.experiment()?;
            let kind = ControllerKind::from_name(controller).ok_or_else(|| {
                BenchError::config("--controller", format!("unknown controller '{controller}'"))
            })?;
            let m = match maneuver {
                Some(id) => exp.maneuver(id)?,
                None => &exp.maneuvers[0],
            };
            let record = run_maneuver(&m.spec, kind, &exp.closed_loop, exp.seed)
                .map_err(|e| BenchError::simulation(format!("{} {}", m.id, kind), e))?;
            create_dir(&exp.output_dir)?;
            let path = exp
                .output_dir
                .join(output::trajectory_file_name(&m.id, kind.name()));
            output::write_trajectory_file(&path, &record)?;
            let (lo, hi) = record.stage3_yaw_rate_range();
            Ok(format!(
                "{} {} seed={} gamma_exp={:.6e} switch_count={} sigma_at_entry={} settled={} wz_range=[{:.3}, {:.3}] csv={}\n",
                m.id,
                kind,
                exp.seed,
                record.gamma_exp,
                record.switch_count,
                record.sigma_at_entry().as_i8(),
                record.settled_equilibrium().as_i8(),
                lo,
                hi,
                path.display()
            ))
        }
        Command::Sweep { common, jobs } => {
            let exp = common.experiment()?;
            let report = run_sweep(&exp, *jobs)?;
            create_dir(&exp.output_dir)?;
            output::write_sweep(&exp.output_dir, &report)?;
            if let Some((_, err)) = report.failures().next() {
                return Err(err);
            }
            Ok(report.comparison_table())
        }
    }
}
