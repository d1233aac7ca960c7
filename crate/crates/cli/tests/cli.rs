//! Command behavior and exit statuses of the `psi-sim` binary.

use std::fs;
use std::path::Path;
use std::process::{Command, Output};

fn psi_sim(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_psi-sim"))
        .args(args)
        .env_remove("PSI_SIM_OUT_DIR")
        .output()
        .expect("binary runs")
}

fn code(out: &Output) -> i32 {
    out.status.code().expect("exit code")
}

fn path(p: &Path) -> &str {
    p.to_str().unwrap()
}

#[test]
fn run_writes_every_artifact() {
    let dir = tempfile::tempdir().unwrap();
    let out = psi_sim(&[
        "run",
        "--scenario",
        "s2",
        "--ticks",
        "300",
        "--out-dir",
        path(dir.path()),
    ]);
    assert_eq!(code(&out), 0, "{}", String::from_utf8_lossy(&out.stderr));
    for f in [
        "run.jsonl",
        "engage_bins.csv",
        "social_actions.csv",
        "exchange_actions.csv",
        "all_actions.csv",
        "network.graphml",
        "network.csv",
    ] {
        assert!(dir.path().join(f).is_file(), "missing {f}");
    }
    let bins = fs::read_to_string(dir.path().join("engage_bins.csv")).unwrap();
    assert!(bins.starts_with("bin,start,intra,inter"));
}

#[test]
fn out_dir_defaults_from_environment() {
    let dir = tempfile::tempdir().unwrap();
    let target = dir.path().join("from-env");
    let out = Command::new(env!("CARGO_BIN_EXE_psi-sim"))
        .args(["run", "--ticks", "10"])
        .env("PSI_SIM_OUT_DIR", &target)
        .output()
        .unwrap();
    assert_eq!(code(&out), 0);
    assert!(target.join("run.jsonl").is_file());
}

#[test]
fn missing_map_is_a_config_error() {
    let dir = tempfile::tempdir().unwrap();
    let out = psi_sim(&[
        "run",
        "--map",
        "/nonexistent/world.map",
        "--out-dir",
        path(dir.path()),
    ]);
    assert_eq!(code(&out), 2);
    assert!(!dir.path().join("run.jsonl").exists());
}

#[test]
fn invalid_config_and_usage_exit_2() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("bad.toml");
    fs::write(&cfg, "[world]\nfood_rate = 2.5\n").unwrap();
    assert_eq!(code(&psi_sim(&["validate", "--config", path(&cfg)])), 2);
    fs::write(&cfg, "[world]\nno_such_field = 1\n").unwrap();
    assert_eq!(code(&psi_sim(&["validate", "--config", path(&cfg)])), 2);
    assert_eq!(code(&psi_sim(&["run", "--scenario", "s9"])), 2);
    assert_eq!(
        code(&psi_sim(&[
            "run",
            "--bin",
            "0",
            "--ticks",
            "5",
            "--out-dir",
            path(dir.path())
        ])),
        2
    );
}

#[test]
fn validate_accepts_defaults() {
    let out = psi_sim(&["validate"]);
    assert_eq!(code(&out), 0, "{}", String::from_utf8_lossy(&out.stderr));
}

#[test]
fn corrupt_log_exits_4() {
    let dir = tempfile::tempdir().unwrap();
    let log = dir.path().join("run.jsonl");
    fs::write(&log, "{\"type\":\"event\",\"tick\":0}\n").unwrap();
    let out = psi_sim(&["metrics", path(&log), "--which", "engage-bins"]);
    assert_eq!(code(&out), 4);
}

#[test]
fn metrics_refine_bins_and_reject_unknown_formats() {
    let dir = tempfile::tempdir().unwrap();
    let run = psi_sim(&[
        "run",
        "--scenario",
        "s2",
        "--ticks",
        "1000",
        "--out-dir",
        path(dir.path()),
    ]);
    assert_eq!(code(&run), 0);
    let log = dir.path().join("run.jsonl");
    let rows = |bin: &str| -> Vec<Vec<u64>> {
        let out = psi_sim(&[
            "metrics",
            path(&log),
            "--which",
            "engage-bins",
            "--bin",
            bin,
        ]);
        assert_eq!(code(&out), 0);
        String::from_utf8(out.stdout)
            .unwrap()
            .lines()
            .skip(1)
            .map(|l| l.split(',').map(|v| v.parse().unwrap()).collect())
            .collect()
    };
    let coarse = rows("500");
    let fine = rows("250");
    assert_eq!(coarse.len(), 2);
    assert_eq!(fine.len(), 4);
    for (i, c) in coarse.iter().enumerate() {
        assert_eq!(c[2], fine[2 * i][2] + fine[2 * i + 1][2]);
        assert_eq!(c[3], fine[2 * i][3] + fine[2 * i + 1][3]);
    }
    let stored = fs::read_to_string(dir.path().join("engage_bins.csv")).unwrap();
    let again = psi_sim(&["metrics", path(&log), "--which", "engage-bins"]);
    assert_eq!(String::from_utf8(again.stdout).unwrap(), stored);

    let bad = psi_sim(&[
        "metrics",
        path(&log),
        "--which",
        "network",
        "--format",
        "gexf",
    ]);
    assert_eq!(code(&bad), 2);
    let csv = psi_sim(&[
        "metrics",
        path(&log),
        "--which",
        "network",
        "--format",
        "csv",
        "--symmetrize",
    ]);
    assert_eq!(code(&csv), 0);
}

#[test]
fn grid_filters_by_scenario() {
    let dir = tempfile::tempdir().unwrap();
    let out = psi_sim(&[
        "grid",
        "--scenario",
        "s3",
        "--ticks",
        "0",
        "--jobs",
        "1",
        "--out-dir",
        path(dir.path()),
    ]);
    assert_eq!(code(&out), 0, "{}", String::from_utf8_lossy(&out.stderr));
    let manifest: serde_json::Value =
        serde_json::from_str(&fs::read_to_string(dir.path().join("manifest.json")).unwrap())
            .unwrap();
    let entries = manifest.as_array().unwrap();
    assert_eq!(entries.len(), 9);
    assert!(entries
        .iter()
        .all(|e| e["ok"] == true && e["scenario"] == "s3"));
    assert!(dir.path().join("s3_g2_s3").join("run.jsonl").is_file());
}

#[test]
fn grid_results_do_not_depend_on_job_count() {
    let a = tempfile::tempdir().unwrap();
    let b = tempfile::tempdir().unwrap();
    for (dir, jobs) in [(&a, "1"), (&b, "3")] {
        let out = psi_sim(&[
            "grid",
            "--scenario",
            "s2",
            "--ticks",
            "150",
            "--jobs",
            jobs,
            "--out-dir",
            path(dir.path()),
        ]);
        assert_eq!(code(&out), 0);
    }
    for g in 1..=3 {
        for r in 1..=3 {
            let name = format!("s2_g{g}_s{r}/run.jsonl");
            assert_eq!(
                fs::read(a.path().join(&name)).unwrap(),
                fs::read(b.path().join(&name)).unwrap(),
                "{name}"
            );
        }
    }
}
