//! End-to-end exercises of the `influmax` binary: exit codes, output
//! files, and the machine-parsable summary line.

use std::path::Path;
use std::process::{Command, Output};

fn bin() -> &'static str {
    env!("CARGO_BIN_EXE_influmax")
}

fn write_config(dir: &Path) -> std::path::PathBuf {
    let path = dir.join("exp.toml");
    std::fs::write(
        &path,
        r#"
[model]
kind = "sbm"
n = 40
block_sizes = [20, 20]
rates = [[1.2, 0.3], [0.3, 0.6]]

[algorithm]
name = "local_ucb_sub"
alpha = 0.25
T = 100

[experiment]
replications = 2
seed = 11
estimate_samples = 1000
"#,
    )
    .unwrap();
    path
}

fn run(args: &[&str]) -> Output {
    Command::new(bin()).args(args).output().unwrap()
}

#[test]
fn run_produces_outputs_and_summary() {
    let tmp = tempfile::tempdir().unwrap();
    let config = write_config(tmp.path());
    let out = tmp.path().join("out");
    let result = run(&[
        "run",
        "--config",
        config.to_str().unwrap(),
        "--out",
        out.to_str().unwrap(),
    ]);
    assert!(result.status.success(), "{result:?}");
    let summary = String::from_utf8(result.stdout).unwrap();
    assert_eq!(summary.lines().count(), 1);
    assert!(summary.starts_with("status=ok "));
    assert!(summary.contains("final_mean_cum_regret="));
    for file in [
        "metadata.json",
        "regret.csv",
        "regret_unclamped.csv",
        "pulls.csv",
        "estimates.csv",
    ] {
        assert!(out.join(file).exists(), "missing {file}");
    }
}

#[test]
fn missing_config_is_usage_error() {
    let result = run(&["run", "--config", "/nonexistent/exp.toml"]);
    assert_eq!(result.status.code(), Some(2));
    let stderr = String::from_utf8(result.stderr).unwrap();
    assert!(stderr.contains("/nonexistent/exp.toml"));
}

#[test]
fn malformed_config_is_usage_error() {
    let tmp = tempfile::tempdir().unwrap();
    let path = tmp.path().join("bad.toml");
    std::fs::write(&path, "[model]\nkind = \"sbm\"\nn = \"forty\"\n").unwrap();
    let result = run(&["run", "--config", path.to_str().unwrap()]);
    assert_eq!(result.status.code(), Some(2));
}

#[test]
fn regime_guard_exits_three() {
    let tmp = tempfile::tempdir().unwrap();
    let config = write_config(tmp.path());
    let result = run(&[
        "run",
        "--config",
        config.to_str().unwrap(),
        "--override",
        "algorithm.name=local_ucb_sup",
    ]);
    assert_eq!(result.status.code(), Some(3));
    let stderr = String::from_utf8(result.stderr).unwrap();
    assert!(stderr.contains("regime"));
}

#[test]
fn override_regime_forces_the_run() {
    let tmp = tempfile::tempdir().unwrap();
    let config = write_config(tmp.path());
    let out = tmp.path().join("forced");
    let result = run(&[
        "run",
        "--config",
        config.to_str().unwrap(),
        "--override",
        "algorithm.name=local_ucb_sup",
        "--override",
        "algorithm.override_regime=true",
        "--out",
        out.to_str().unwrap(),
    ]);
    assert!(result.status.success(), "{result:?}");
}

#[test]
fn unknown_validate_suite_is_usage_error() {
    let result = run(&["validate", "nosuch"]);
    assert_eq!(result.status.code(), Some(2));
}

#[test]
fn validate_klucb_passes() {
    let result = run(&["validate", "klucb"]);
    assert!(result.status.success());
    let stdout = String::from_utf8(result.stdout).unwrap();
    assert!(stdout.lines().count() >= 3);
    for line in stdout.lines() {
        assert!(line.contains("pass=true"), "{line}");
    }
}

#[test]
fn plot_data_missing_dir_is_runtime_error() {
    let tmp = tempfile::tempdir().unwrap();
    let result = run(&["plot-data", tmp.path().join("nope").to_str().unwrap()]);
    assert_eq!(result.status.code(), Some(1));
}

#[test]
fn plot_data_downsamples_long_runs() {
    let tmp = tempfile::tempdir().unwrap();
    let results = tmp.path().join("results");
    std::fs::create_dir_all(&results).unwrap();
    let mut regret = String::from("round,mean_cum_regret,stderr,mean_cum_regret_over_n\n");
    for t in 1..=2500 {
        regret.push_str(&format!("{t},{}.0,0.1,0.01\n", t));
    }
    std::fs::write(results.join("regret.csv"), regret).unwrap();
    std::fs::write(results.join("pulls.csv"), "vertex,total_pulls\n0,10\n").unwrap();
    let result = run(&["plot-data", results.to_str().unwrap()]);
    assert!(result.status.success(), "{result:?}");
    let plot = std::fs::read_to_string(results.join("plot_regret.csv")).unwrap();
    let rows = plot.lines().count() - 1;
    assert!(rows <= 1000, "{rows} rows");
    // Stride for 2500 rounds is 3, so the last kept round is 2499.
    assert!(plot.lines().last().unwrap().starts_with("2499,"));
}

#[test]
fn seed_flag_overrides_config_seed() {
    let tmp = tempfile::tempdir().unwrap();
    let config = write_config(tmp.path());
    let out_a = tmp.path().join("a");
    let out_b = tmp.path().join("b");
    for (out, seed) in [(&out_a, "11"), (&out_b, "99")] {
        let result = run(&[
            "run",
            "--config",
            config.to_str().unwrap(),
            "--seed",
            seed,
            "--out",
            out.to_str().unwrap(),
        ]);
        assert!(result.status.success());
    }
    let a = std::fs::read_to_string(out_a.join("regret.csv")).unwrap();
    let b = std::fs::read_to_string(out_b.join("regret.csv")).unwrap();
    assert_ne!(a, b);
}
