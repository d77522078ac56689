//! CSV and text writers for run and sweep results.

use std::fs;
use std::io::Write;
use std::path::Path;

use mps_core::RunRecord;

use crate::error::{BenchError, Result};
use crate::sweep::{CellOutcome, SweepReport};

pub const TRAJECTORY_HEADER: [&str; 15] = [
    "t",
    "psi_d_rad",
    "psi_rad",
    "qw",
    "qx",
    "qy",
    "qz",
    "wx",
    "wy",
    "wz",
    "tau_x",
    "tau_y",
    "tau_z",
    "sigma",
    "delta_gamma",
];

pub const SUMMARY_HEADER: [&str; 6] = [
    "spec_id",
    "controller",
    "trials",
    "gamma_mean",
    "gamma_esd",
    "switch_count_max",
];

pub const FAILED: &str = "FAILED";

/// Plain decimal notation (never an exponent) with 12 significant digits.
pub fn format_number(x: f64) -> String {
    if x == 0.0 {
        return "0".to_owned();
    }
    if !x.is_finite() {
        return x.to_string();
    }
    // The exponent of the value after rounding to 12 significant digits.
    let sci = format!("{:.11e}", x);
    let exp: i32 = sci[sci.find('e').unwrap() + 1..].parse().unwrap();
    let decimals = (11 - exp).max(0) as usize;
    format!("{:.*}", decimals, x)
}

fn csv_error(path: &Path, e: csv::Error) -> BenchError {
    let source = match e.into_kind() {
        csv::ErrorKind::Io(io) => io,
        other => std::io::Error::other(format!("{other:?}")),
    };
    BenchError::io(path, source)
}

pub fn write_trajectory<W: Write>(out: W, record: &RunRecord) -> csv::Result<()> {
    let mut w = csv::Writer::from_writer(out);
    w.write_record(TRAJECTORY_HEADER)?;
    for s in &record.samples {
        let q = s.q.to_array();
        let nums = [
            s.t, s.psi_d, s.psi, q[0], q[1], q[2], q[3], s.omega.x, s.omega.y, s.omega.z, s.tau.x,
            s.tau.y, s.tau.z,
        ];
        let mut row: Vec<String> = nums.iter().map(|&v| format_number(v)).collect();
        row.push(s.sigma.as_i8().to_string());
        row.push(format_number(s.delta_gamma));
        w.write_record(&row)?;
    }
    w.flush()?;
    Ok(())
}

pub fn write_trajectory_file(path: &Path, record: &RunRecord) -> Result<()> {
    let file = fs::File::create(path).map_err(|e| BenchError::io(path, e))?;
    write_trajectory(std::io::BufWriter::new(file), record).map_err(|e| csv_error(path, e))
}

pub fn write_summary<W: Write>(out: W, report: &SweepReport) -> csv::Result<()> {
    let mut w = csv::Writer::from_writer(out);
    w.write_record(SUMMARY_HEADER)?;
    for cell in &report.cells {
        let row = match &cell.outcome {
            CellOutcome::Done(stats) => [
                cell.spec_id.clone(),
                cell.controller.name().to_owned(),
                stats.gammas.len().to_string(),
                format_number(stats.mean),
                format_number(stats.esd),
                stats.switch_count_max.to_string(),
            ],
            CellOutcome::Failed { .. } => [
                cell.spec_id.clone(),
                cell.controller.name().to_owned(),
                report.trials.to_string(),
                FAILED.to_owned(),
                FAILED.to_owned(),
                FAILED.to_owned(),
            ],
        };
        w.write_record(&row)?;
    }
    w.flush()?;
    Ok(())
}

/// Writes `summary.csv`, `comparison.txt` and one first-trial trajectory per
/// successful cell under `dir/trajectories/`.
pub fn write_sweep(dir: &Path, report: &SweepReport) -> Result<()> {
    let traj_dir = dir.join("trajectories");
    fs::create_dir_all(&traj_dir).map_err(|e| BenchError::io(&traj_dir, e))?;

    let summary = dir.join("summary.csv");
    let file = fs::File::create(&summary).map_err(|e| BenchError::io(&summary, e))?;
    write_summary(std::io::BufWriter::new(file), report).map_err(|e| csv_error(&summary, e))?;

    let comparison = dir.join("comparison.txt");
    fs::write(&comparison, report.comparison_table())
        .map_err(|e| BenchError::io(&comparison, e))?;

    for cell in &report.cells {
        if let CellOutcome::Done(stats) = &cell.outcome {
            let path = traj_dir.join(trajectory_file_name(&cell.spec_id, cell.controller.name()));
            write_trajectory_file(&path, &stats.first_trial)?;
        }
    }
    Ok(())
}

pub fn trajectory_file_name(spec_id: &str, controller: &str) -> String {
    format!("{spec_id}_{controller}.csv")
}
