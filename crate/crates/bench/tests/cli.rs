use std::path::Path;
use std::process::{Command, Output};

use mps_bench::config::FLIGHT_TEST_TOML;

fn bench(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_mps-bench"))
        .args(args)
        .output()
        .expect("binary runs")
}

fn stderr(out: &Output) -> String {
    String::from_utf8_lossy(&out.stderr).into_owned()
}

fn write_config(dir: &Path, text: &str) -> String {
    let path = dir.join("experiment.toml");
    std::fs::write(&path, text).unwrap();
    path.to_str().unwrap().to_owned()
}

/// A cheap grid: two maneuvers, short scoring window.
fn small_config() -> String {
    let text = FLIGHT_TEST_TOML.replace("scored_samples = 1500", "scored_samples = 150");
    let cut = text.find("[[maneuver]]\nid = \"w2_psi210\"").unwrap();
    text[..cut].to_owned()
}

#[test]
fn validate_accepts_the_builtin_config() {
    let out = bench(&["validate"]);
    assert!(out.status.success(), "{}", stderr(&out));
    assert_eq!(
        String::from_utf8_lossy(&out.stdout),
        "config ok: 6 maneuvers, 10 trials, benchmark vs mps\n"
    );
}

#[test]
fn zero_delta_is_a_config_error() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_config(
        dir.path(),
        &FLIGHT_TEST_TOML.replace("delta = 5e-7", "delta = 0.0"),
    );
    let out = bench(&["validate", "--config", &cfg]);
    assert_eq!(out.status.code(), Some(3));
    let err = stderr(&out);
    assert_eq!(err.lines().count(), 1, "{err}");
    assert!(
        err.starts_with("error kind=config_invalid message=\"selector.delta:"),
        "{err}"
    );
}

#[test]
fn missing_config_file_is_a_config_error() {
    let out = bench(&["validate", "--config", "/nonexistent/experiment.toml"]);
    assert_eq!(out.status.code(), Some(3));
    assert!(stderr(&out).starts_with("error kind=config_invalid"));
}

#[test]
fn unknown_key_and_bad_toml_are_config_errors() {
    let dir = tempfile::tempdir().unwrap();
    for text in [
        format!("extra = true\n{FLIGHT_TEST_TOML}"),
        "seed = [".to_owned(),
    ] {
        let cfg = write_config(dir.path(), &text);
        let out = bench(&["validate", "--config", &cfg]);
        assert_eq!(out.status.code(), Some(3), "{}", stderr(&out));
        assert_eq!(stderr(&out).lines().count(), 1);
    }
}

#[test]
fn unknown_maneuver_or_controller_is_rejected() {
    let dir = tempfile::tempdir().unwrap();
    let out_dir = dir.path().to_str().unwrap();
    let out = bench(&["run", "--maneuver", "nope", "--out", out_dir]);
    assert_eq!(out.status.code(), Some(3));
    let out = bench(&["run", "--controller", "pid", "--out", out_dir]);
    assert_eq!(out.status.code(), Some(3));
    assert!(stderr(&out).contains("--controller"));
}

#[test]
fn bad_arguments_exit_with_usage_code() {
    assert_eq!(bench(&["sweep", "--jobs", "many"]).status.code(), Some(2));
    assert_eq!(bench(&["frobnicate"]).status.code(), Some(2));
}

#[test]
fn divergence_exits_with_its_own_code() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_config(
        dir.path(),
        &small_config().replace("divergence_bound = 200.0", "divergence_bound = 1.0"),
    );
    let out_dir = dir.path().join("out");
    let out = bench(&[
        "run",
        "--config",
        &cfg,
        "--out",
        out_dir.to_str().unwrap(),
        "--controller",
        "benchmark",
    ]);
    assert_eq!(out.status.code(), Some(5));
    assert!(stderr(&out).starts_with("error kind=diverged_state"));

    // A sweep still writes its summary, with the failed cells marked.
    let out = bench(&[
        "sweep",
        "--config",
        &cfg,
        "--out",
        out_dir.to_str().unwrap(),
        "--trials",
        "1",
    ]);
    assert_eq!(out.status.code(), Some(5));
    let summary = std::fs::read_to_string(out_dir.join("summary.csv")).unwrap();
    assert_eq!(
        summary
            .lines()
            .filter(|l| l.ends_with("FAILED,FAILED,FAILED"))
            .count(),
        4
    );
}

#[test]
fn unwritable_output_is_an_io_error() {
    let dir = tempfile::tempdir().unwrap();
    let blocker = dir.path().join("file");
    std::fs::write(&blocker, "").unwrap();
    let cfg = write_config(dir.path(), &small_config());
    let out = bench(&[
        "run",
        "--config",
        &cfg,
        "--out",
        blocker.join("sub").to_str().unwrap(),
    ]);
    assert_eq!(out.status.code(), Some(4));
    assert!(stderr(&out).starts_with("error kind=io_failure"));
}

#[test]
fn run_writes_a_trajectory_and_reports_gamma() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_config(dir.path(), &small_config());
    let out = bench(&[
        "run",
        "--config",
        &cfg,
        "--out",
        dir.path().to_str().unwrap(),
        "--maneuver",
        "w2_psi170",
        "--controller",
        "mps",
        "--seed",
        "3",
    ]);
    assert!(out.status.success(), "{}", stderr(&out));
    let stdout = String::from_utf8_lossy(&out.stdout);
    assert!(
        stdout.starts_with("w2_psi170 mps seed=3 gamma_exp="),
        "{stdout}"
    );
    assert!(stdout.contains("sigma_at_entry=-1"), "{stdout}");
    assert!(dir.path().join("w2_psi170_mps.csv").is_file());
}

#[test]
fn sweep_writes_summary_comparison_and_trajectories() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_config(dir.path(), &small_config());
    let out = bench(&[
        "sweep",
        "--config",
        &cfg,
        "--out",
        dir.path().to_str().unwrap(),
        "--trials",
        "2",
        "--jobs",
        "2",
    ]);
    assert!(out.status.success(), "{}", stderr(&out));
    let summary = std::fs::read_to_string(dir.path().join("summary.csv")).unwrap();
    let lines: Vec<&str> = summary.lines().collect();
    assert_eq!(
        lines[0],
        "spec_id,controller,trials,gamma_mean,gamma_esd,switch_count_max"
    );
    assert_eq!(lines.len(), 5);
    assert!(lines[1].starts_with("w2_psi90,benchmark,2,"));
    assert!(lines[4].starts_with("w2_psi170,mps,2,"));
    let table = std::fs::read_to_string(dir.path().join("comparison.txt")).unwrap();
    assert!(table.contains("aggregate reduction:"));
    assert_eq!(String::from_utf8_lossy(&out.stdout), table);
    for name in [
        "w2_psi90_benchmark",
        "w2_psi90_mps",
        "w2_psi170_benchmark",
        "w2_psi170_mps",
    ] {
        assert!(dir
            .path()
            .join("trajectories")
            .join(format!("{name}.csv"))
            .is_file());
    }
}
