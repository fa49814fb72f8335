use std::fs;
use std::path::Path;
use std::process::{Command, Output};

fn mpsplit(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_mpsplit"))
        .args(args)
        .env_remove("MPSPLIT_SEED")
        .output()
        .expect("spawn mpsplit")
}

fn short_run(preset: &str, seed: &str, out: &Path) -> Output {
    mpsplit(&[
        "run",
        "--preset",
        preset,
        "--bandwidth",
        "100e6",
        "--seed",
        seed,
        "--set",
        "scenario.simulation_time_s=50",
        "--out",
        out.to_str().unwrap(),
    ])
}

#[test]
fn run_writes_the_output_layout() {
    let dir = tempfile::tempdir().unwrap();
    let out = short_run("scenario1", "42", dir.path());
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    for f in [
        "manifest.json",
        "config.toml",
        "summary.json",
        "records/records.csv",
        "records/decisions.csv",
        "records/samples.csv",
        "records/trajectory.csv",
        "cdf/cdf.csv",
    ] {
        assert!(dir.path().join(f).is_file(), "missing {f}");
    }
    let cdf = fs::read_to_string(dir.path().join("cdf/cdf.csv")).unwrap();
    assert!(cdf.starts_with("solution,traffic,latency_ms,cumulative_probability"));
    let traj = fs::read_to_string(dir.path().join("records/trajectory.csv")).unwrap();
    assert!(traj.starts_with("interval,x_m,y_m,distance_bs1_m,distance_bs2_m"));
    assert_eq!(traj.lines().count(), 101);
    let manifest: serde_json::Value = serde_json::from_str(&fs::read_to_string(dir.path().join("manifest.json")).unwrap()).unwrap();
    assert_eq!(manifest["seed"], 42);
    assert_eq!(manifest["schema_version"], "mpsplit-output-v1");
}

#[test]
fn same_seed_gives_identical_files() {
    let a = tempfile::tempdir().unwrap();
    let b = tempfile::tempdir().unwrap();
    assert!(short_run("scenario2", "7", a.path()).status.success());
    assert!(short_run("scenario2", "7", b.path()).status.success());
    for f in ["summary.json", "config.toml", "records/records.csv", "records/decisions.csv", "records/samples.csv", "cdf/cdf.csv"] {
        assert_eq!(fs::read(a.path().join(f)).unwrap(), fs::read(b.path().join(f)).unwrap(), "{f} differs");
    }
}

#[test]
fn validate_rejects_a_bad_config_with_exit_3() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("bad.toml");
    fs::write(
        &path,
        "[[traffic]]\npacket_size_bytes = 100\nmean_arrival_rate_pps = 200.0\nmean_queue_packets = 10.0\n\
         latency_constraint_s = 0.9\ngbr_path1_range_bps = [0.0, 140e6]\ngbr_path2_range_bps = [110e6, 130e6]\n",
    )
    .unwrap();
    let out = mpsplit(&["validate", "--config", path.to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(3));
    let err = String::from_utf8_lossy(&out.stderr);
    assert!(err.contains("traffic[0].gbr_path1_range_bps"), "{err}");
}

#[test]
fn unknown_keys_and_missing_files_are_config_errors() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("typo.toml");
    fs::write(&path, "[radio]\nbandwith_hz = 1e6\n").unwrap();
    assert_eq!(mpsplit(&["validate", "--config", path.to_str().unwrap()]).status.code(), Some(3));
    assert_eq!(mpsplit(&["validate", "--config", "/nonexistent/cfg.toml"]).status.code(), Some(3));
    assert_eq!(mpsplit(&["validate", "--preset", "scenario9"]).status.code(), Some(3));
}

#[test]
fn usage_errors_exit_2() {
    assert_eq!(mpsplit(&["run"]).status.code(), Some(2));
    assert_eq!(mpsplit(&["validate", "--preset", "scenario1", "--config", "x.toml"]).status.code(), Some(2));
    assert_eq!(mpsplit(&["frobnicate"]).status.code(), Some(2));
}

#[test]
fn validate_accepts_presets_and_written_configs() {
    let out = mpsplit(&["validate", "--preset", "scenario2"]);
    assert!(out.status.success());
    assert!(String::from_utf8_lossy(&out.stdout).contains("1000 interval(s)"));

    let dir = tempfile::tempdir().unwrap();
    assert!(short_run("scenario1", "3", dir.path()).status.success());
    let written = dir.path().join("config.toml");
    assert!(mpsplit(&["validate", "--config", written.to_str().unwrap()]).status.success());
}

#[test]
fn seed_env_var_is_honoured_and_flag_wins() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("c.toml");
    fs::write(&cfg, "seed = 5\n[scenario]\nsimulation_time_s = 5.0\n").unwrap();
    let run = |env: Option<&str>, extra: &[&str], out: &Path| {
        let mut cmd = Command::new(env!("CARGO_BIN_EXE_mpsplit"));
        cmd.args(["run", "--config", cfg.to_str().unwrap(), "--out", out.to_str().unwrap()]).args(extra);
        match env {
            Some(v) => cmd.env("MPSPLIT_SEED", v),
            None => cmd.env_remove("MPSPLIT_SEED"),
        };
        assert!(cmd.output().unwrap().status.success());
        let m: serde_json::Value = serde_json::from_str(&fs::read_to_string(out.join("manifest.json")).unwrap()).unwrap();
        m["seed"].as_u64().unwrap()
    };
    assert_eq!(run(None, &[], &dir.path().join("a")), 5);
    assert_eq!(run(Some("11"), &[], &dir.path().join("b")), 11);
    assert_eq!(run(Some("11"), &["--seed", "12"], &dir.path().join("c")), 12);
}

#[test]
fn sweep_writes_one_row_per_value_solution_and_traffic() {
    let dir = tempfile::tempdir().unwrap();
    let out = mpsplit(&[
        "sweep",
        "--preset",
        "scenario2",
        "--param",
        "bandwidth",
        "--values",
        "10e6,50e6,100e6",
        "--set",
        "scenario.simulation_time_s=20",
        "--out",
        dir.path().to_str().unwrap(),
    ]);
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    let text = fs::read_to_string(dir.path().join("sweep.csv")).unwrap();
    let mut lines = text.lines();
    assert_eq!(
        lines.next().unwrap(),
        "parameter,value,solution,traffic,mean_latency_ms,deadline_miss_rate,intervals"
    );
    assert_eq!(lines.count(), 3 * 4);
}

#[test]
fn replay_of_a_recorded_trace_reproduces_the_run() {
    let dir = tempfile::tempdir().unwrap();
    let first = dir.path().join("first");
    let second = dir.path().join("second");
    assert!(short_run("scenario1", "9", &first).status.success());
    let out = mpsplit(&[
        "replay",
        "--config",
        first.join("config.toml").to_str().unwrap(),
        "--trace",
        first.join("records/samples.csv").to_str().unwrap(),
        "--out",
        second.to_str().unwrap(),
    ]);
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    for f in ["summary.json", "records/records.csv", "cdf/cdf.csv"] {
        assert_eq!(fs::read(first.join(f)).unwrap(), fs::read(second.join(f)).unwrap(), "{f} differs");
    }
}

#[test]
fn oracle_check_reports_agreement() {
    let out = mpsplit(&["oracle-check", "--instances", "50", "--power-points", "2001"]);
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    assert!(String::from_utf8_lossy(&out.stdout).contains("max relative error"));
}
