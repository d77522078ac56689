//! Monte-Carlo sweeps over the maneuver grid.
//!
//! Trial `k` of every cell uses seed `seed + k`, so the baseline and the
//! candidate fly from the same perturbed initial conditions.

use std::fmt::Write as _;

use mps_core::maneuver::mean_and_esd;
use mps_core::{run_maneuver, ControllerKind, RunRecord, Sigma};
use rayon::prelude::*;

use crate::config::{Experiment, NamedManeuver};
use crate::error::{BenchError, Result};

#[derive(Debug, Clone, PartialEq)]
pub struct CellStats {
    pub gammas: Vec<f64>,
    pub mean: f64,
    pub esd: f64,
    pub switch_count_max: usize,
    /// Equilibrium reached by each trial, in trial order.
    pub settled: Vec<Sigma>,
    pub first_trial: RunRecord,
}

#[derive(Debug, Clone, PartialEq)]
pub enum CellOutcome {
    Done(CellStats),
    /// The first failing trial.
    Failed {
        trial: usize,
        error: mps_core::Error,
    },
}

#[derive(Debug, Clone, PartialEq)]
pub struct Cell {
    pub spec_id: String,
    pub controller: ControllerKind,
    pub outcome: CellOutcome,
}

#[derive(Debug, Clone, PartialEq)]
pub struct CellComparison {
    pub spec_id: String,
    pub baseline_mean: f64,
    pub candidate_mean: f64,
    /// `1 − candidate/baseline`.
    pub reduction: f64,
    /// Fraction of paired trials that settled into the same equilibrium.
    pub same_equilibrium: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SweepReport {
    pub seed: u64,
    pub trials: usize,
    pub baseline: ControllerKind,
    pub candidate: ControllerKind,
    /// Maneuver-major, baseline before candidate.
    pub cells: Vec<Cell>,
}

/// Seed for trial `k`.
pub fn trial_seed(seed: u64, trial: usize) -> u64 {
    seed.wrapping_add(trial as u64)
}

fn run_trial(
    exp: &Experiment,
    maneuver: &NamedManeuver,
    kind: ControllerKind,
    trial: usize,
) -> mps_core::Result<RunRecord> {
    run_maneuver(
        &maneuver.spec,
        kind,
        &exp.closed_loop,
        trial_seed(exp.seed, trial),
    )
}

/// Runs every maneuver under the baseline and candidate controllers.
///
/// `jobs = 0` lets rayon pick the worker count. Results do not depend on it.
pub fn run_sweep(exp: &Experiment, jobs: usize) -> Result<SweepReport> {
    let kinds = [exp.baseline, exp.candidate];
    let mut work = Vec::new();
    for (mi, _) in exp.maneuvers.iter().enumerate() {
        for &kind in &kinds {
            for trial in 0..exp.trials {
                work.push((mi, kind, trial));
            }
        }
    }

    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(jobs)
        .build()
        .map_err(|e| BenchError::config("--jobs", e.to_string()))?;
    let results: Vec<mps_core::Result<RunRecord>> = pool.install(|| {
        work.par_iter()
            .map(|&(mi, kind, trial)| run_trial(exp, &exp.maneuvers[mi], kind, trial))
            .collect()
    });

    let mut cells = Vec::new();
    let mut results = results.into_iter();
    for maneuver in &exp.maneuvers {
        for &kind in &kinds {
            let runs: Vec<_> = results.by_ref().take(exp.trials).collect();
            cells.push(Cell {
                spec_id: maneuver.id.clone(),
                controller: kind,
                outcome: summarize(runs),
            });
        }
    }

    Ok(SweepReport {
        seed: exp.seed,
        trials: exp.trials,
        baseline: exp.baseline,
        candidate: exp.candidate,
        cells,
    })
}

fn summarize(runs: Vec<mps_core::Result<RunRecord>>) -> CellOutcome {
    let mut records = Vec::with_capacity(runs.len());
    for (trial, run) in runs.into_iter().enumerate() {
        match run {
            Ok(r) => records.push(r),
            Err(error) => return CellOutcome::Failed { trial, error },
        }
    }
    let gammas: Vec<f64> = records.iter().map(|r| r.gamma_exp).collect();
    let (mean, esd) = mean_and_esd(&gammas).expect("at least one trial");
    CellOutcome::Done(CellStats {
        mean,
        esd,
        switch_count_max: records.iter().map(|r| r.switch_count).max().unwrap_or(0),
        settled: records.iter().map(RunRecord::settled_equilibrium).collect(),
        gammas,
        first_trial: records.swap_remove(0),
    })
}

impl SweepReport {
    pub fn cell(&self, spec_id: &str, controller: ControllerKind) -> Option<&Cell> {
        self.cells
            .iter()
            .find(|c| c.spec_id == spec_id && c.controller == controller)
    }

    /// Failed cells, each with the error of its first failing trial.
    pub fn failures(&self) -> impl Iterator<Item = (&Cell, BenchError)> {
        self.cells.iter().filter_map(|c| match c.outcome {
            CellOutcome::Failed { trial, error } => Some((
                c,
                BenchError::simulation(
                    format!("{} {} trial {}", c.spec_id, c.controller, trial),
                    error,
                ),
            )),
            CellOutcome::Done(_) => None,
        })
    }

    /// One entry per maneuver where both controllers completed.
    pub fn comparisons(&self) -> Vec<CellComparison> {
        let mut ids: Vec<&str> = Vec::new();
        for c in &self.cells {
            if !ids.contains(&c.spec_id.as_str()) {
                ids.push(&c.spec_id);
            }
        }
        ids.into_iter()
            .filter_map(|id| {
                let stats = |kind| match &self.cell(id, kind)?.outcome {
                    CellOutcome::Done(s) => Some(s),
                    CellOutcome::Failed { .. } => None,
                };
                let base = stats(self.baseline)?;
                let cand = stats(self.candidate)?;
                let same = base
                    .settled
                    .iter()
                    .zip(&cand.settled)
                    .filter(|(a, b)| a == b)
                    .count();
                Some(CellComparison {
                    spec_id: id.to_owned(),
                    baseline_mean: base.mean,
                    candidate_mean: cand.mean,
                    reduction: 1.0 - cand.mean / base.mean,
                    same_equilibrium: same as f64 / base.settled.len() as f64,
                })
            })
            .collect()
    }

    /// Mean of the per-maneuver reductions.
    pub fn aggregate_reduction(&self) -> Option<f64> {
        let reductions: Vec<f64> = self.comparisons().iter().map(|c| c.reduction).collect();
        mean_and_esd(&reductions).map(|(m, _)| m)
    }

    pub fn comparison_table(&self) -> String {
        let mut out = String::new();
        let b = self.baseline.name();
        let c = self.candidate.name();
        let _ = writeln!(out, "seed {}  trials {}", self.seed, self.trials);
        let _ = writeln!(
            out,
            "{:<14} {:>16} {:>16} {:>10} {:>10}",
            "spec_id",
            format!("{b}_gamma"),
            format!("{c}_gamma"),
            "reduction",
            "same_eq"
        );
        for cmp in self.comparisons() {
            let _ = writeln!(
                out,
                "{:<14} {:>16.6e} {:>16.6e} {:>9.1}% {:>9.0}%",
                cmp.spec_id,
                cmp.baseline_mean,
                cmp.candidate_mean,
                100.0 * cmp.reduction,
                100.0 * cmp.same_equilibrium
            );
        }
        for (_, err) in self.failures() {
            let _ = writeln!(out, "FAILED {err}");
        }
        match self.aggregate_reduction() {
            Some(r) => {
                let _ = writeln!(out, "aggregate reduction: {:.1}%", 100.0 * r);
            }
            None => {
                let _ = writeln!(out, "aggregate reduction: n/a");
            }
        }
        out
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::config::ExperimentConfig;

    fn small_experiment(trials: usize) -> Experiment {
        let mut cfg = ExperimentConfig::flight_test();
        cfg.trials = trials;
        cfg.simulation.scored_samples = 200;
        cfg.maneuvers.truncate(2);
        cfg.validate().unwrap()
    }

    #[test]
    fn seeds_are_consecutive_and_wrap() {
        assert_eq!(trial_seed(7, 0), 7);
        assert_eq!(trial_seed(7, 3), 10);
        assert_eq!(trial_seed(u64::MAX, 1), 0);
    }

    #[test]
    fn cell_order_is_maneuver_major() {
        let exp = small_experiment(2);
        let report = run_sweep(&exp, 2).unwrap();
        let order: Vec<(&str, ControllerKind)> = report
            .cells
            .iter()
            .map(|c| (c.spec_id.as_str(), c.controller))
            .collect();
        assert_eq!(
            order,
            vec![
                ("w2_psi90", ControllerKind::Benchmark),
                ("w2_psi90", ControllerKind::Mps),
                ("w2_psi170", ControllerKind::Benchmark),
                ("w2_psi170", ControllerKind::Mps),
            ]
        );
        assert_eq!(report.comparisons().len(), 2);
    }

    #[test]
    fn worker_count_does_not_change_results() {
        let exp = small_experiment(3);
        assert_eq!(run_sweep(&exp, 1).unwrap(), run_sweep(&exp, 3).unwrap());
    }

    #[test]
    fn divergence_marks_the_cell_failed() {
        let mut cfg = ExperimentConfig::flight_test();
        cfg.trials = 1;
        cfg.plant.divergence_bound = 1.0;
        cfg.maneuvers.truncate(1);
        let report = run_sweep(&cfg.validate().unwrap(), 1).unwrap();
        assert_eq!(report.failures().count(), 2);
        assert!(report.comparisons().is_empty());
        assert!(report.comparison_table().contains("FAILED"));
        let (_, err) = report.failures().next().unwrap();
        assert_eq!(err.kind(), "diverged_state");
        assert!(
            err.to_string().starts_with("w2_psi90 benchmark trial 0"),
            "{err}"
        );
    }
}
