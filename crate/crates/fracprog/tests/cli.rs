use std::fs;
use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use fracprog::ExperimentConfig;

fn bin() -> Command {
    let mut c = Command::new(env!("CARGO_BIN_EXE_fracprog"));
    c.env_remove("FRACPROG_SEED");
    c
}

fn configs() -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("../../configs")
}

fn run(args: &[&str]) -> Output {
    bin().args(args).output().expect("spawn fracprog")
}

fn stderr(o: &Output) -> String {
    String::from_utf8_lossy(&o.stderr).into_owned()
}

fn column(csv_path: &Path, name: &str) -> Vec<String> {
    let mut rdr = csv::Reader::from_path(csv_path).unwrap();
    let idx = rdr.headers().unwrap().iter().position(|h| h == name).unwrap();
    rdr.records().map(|r| r.unwrap()[idx].to_string()).collect()
}

fn write_config(dir: &Path, body: &str) -> PathBuf {
    let p = dir.join("cfg.toml");
    fs::write(&p, body).unwrap();
    p
}

#[test]
fn run_aoi_writes_trace_and_summary() {
    let out = tempfile::tempdir().unwrap();
    let cfg = configs().join("aoi_k3.toml");
    let o = run(&["run", "--config", cfg.to_str().unwrap(), "--out", out.path().to_str().unwrap()]);
    assert!(o.status.success(), "{}", stderr(&o));
    let obj = column(&out.path().join("trace.csv"), "objective");
    assert!(obj.len() >= 2);
    let summary: toml::Value = toml::from_str(&fs::read_to_string(out.path().join("summary.toml")).unwrap()).unwrap();
    assert_eq!(summary["experiment"].as_str(), Some("aoi"));
    let last: f64 = obj.last().unwrap().parse().unwrap();
    assert!((last - 14.66037).abs() < 1e-4, "{last}");
    assert!(out.path().join("baselines.csv").exists());
}

#[test]
fn aoi_sweep_has_one_row_per_k() {
    let out = tempfile::tempdir().unwrap();
    let cfg = configs().join("aoi_sweep.toml");
    let o = run(&["sweep", "--config", cfg.to_str().unwrap(), "--out", out.path().to_str().unwrap()]);
    assert!(o.status.success(), "{}", stderr(&o));
    let ks = column(&out.path().join("sweep.csv"), "k");
    assert_eq!(ks, ["3", "4", "5", "6", "7", "8", "9", "10"]);
}

#[test]
fn radar_sweep_has_five_rows() {
    let out = tempfile::tempdir().unwrap();
    let cfg = configs().join("radar_sweep.toml");
    let o = run(&["sweep", "--config", cfg.to_str().unwrap(), "--out", out.path().to_str().unwrap()]);
    assert!(o.status.success(), "{}", stderr(&o));
    assert_eq!(column(&out.path().join("sweep.csv"), "power_dbm").len(), 5);
}

#[test]
fn secure_run_writes_both_traces() {
    let out = tempfile::tempdir().unwrap();
    let cfg = configs().join("secure_two_link.toml");
    let o = run(&["run", "--config", cfg.to_str().unwrap(), "--out", out.path().to_str().unwrap()]);
    assert!(o.status.success(), "{}", stderr(&o));
    for f in ["trace.csv", "trace_fast.csv", "summary.toml", "baselines.csv"] {
        assert!(out.path().join(f).exists(), "{f}");
    }
}

#[test]
fn verify_core_passes() {
    let o = run(&["verify", "--suite", "core"]);
    assert!(o.status.success(), "{}", stderr(&o));
    let stdout = String::from_utf8_lossy(&o.stdout);
    assert!(stdout.lines().any(|l| l.starts_with("PASS core::")));
    assert!(!stdout.contains("FAIL"));
}

#[test]
fn unknown_suite_is_rejected() {
    let o = run(&["verify", "--suite", "everything"]);
    assert_eq!(o.status.code(), Some(2));
}

#[test]
fn identical_runs_give_identical_traces() {
    let cfg = configs().join("radar.toml");
    let a = tempfile::tempdir().unwrap();
    let b = tempfile::tempdir().unwrap();
    for d in [&a, &b] {
        let o = run(&["run", "--config", cfg.to_str().unwrap(), "--out", d.path().to_str().unwrap()]);
        assert!(o.status.success(), "{}", stderr(&o));
    }
    let ca = column(&a.path().join("trace.csv"), "objective");
    assert_eq!(ca, column(&b.path().join("trace.csv"), "objective"));
    assert_eq!(fs::read(a.path().join("summary.toml")).unwrap(), fs::read(b.path().join("summary.toml")).unwrap());
}

#[test]
fn seed_comes_from_env_when_config_has_none() {
    let out = tempfile::tempdir().unwrap();
    let cfg = configs().join("radar.toml");
    let o = bin()
        .args(["run", "--config", cfg.to_str().unwrap(), "--out", out.path().to_str().unwrap()])
        .env("FRACPROG_SEED", "17")
        .output()
        .unwrap();
    assert!(o.status.success(), "{}", stderr(&o));
    let summary: toml::Value = toml::from_str(&fs::read_to_string(out.path().join("summary.toml")).unwrap()).unwrap();
    assert_eq!(summary["seed"].as_integer(), Some(17));
}

#[test]
fn shipped_configs_round_trip() {
    for entry in fs::read_dir(configs()).unwrap() {
        let p = entry.unwrap().path();
        let cfg = ExperimentConfig::load(&p).unwrap_or_else(|e| panic!("{}: {e}", p.display()));
        cfg.validate().unwrap_or_else(|e| panic!("{}: {e}", p.display()));
        let back = ExperimentConfig::parse(&cfg.to_toml()).unwrap();
        assert_eq!(back, cfg, "{}", p.display());
    }
}

#[test]
fn missing_mu_is_a_config_error() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_config(dir.path(), "experiment = \"aoi\"\n[aoi]\nk = 3\n");
    let o = run(&["run", "--config", cfg.to_str().unwrap(), "--out", dir.path().to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(2));
    assert!(stderr(&o).contains("mu"), "{}", stderr(&o));
}

#[test]
fn unknown_key_is_a_config_error() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_config(dir.path(), "experiment = \"aoi\"\n[aoi]\nk = 3\nmu = 1.0\nlambda = 2.0\n");
    let o = run(&["run", "--config", cfg.to_str().unwrap(), "--out", dir.path().to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(2));
    assert!(stderr(&o).contains("lambda"), "{}", stderr(&o));
}

#[test]
fn missing_config_file_is_an_io_error() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("nope.toml");
    let o = run(&["run", "--config", cfg.to_str().unwrap(), "--out", dir.path().to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(4));
}

#[test]
fn unwritable_output_is_an_io_error() {
    let dir = tempfile::tempdir().unwrap();
    let blocker = dir.path().join("file");
    fs::write(&blocker, "x").unwrap();
    let cfg = configs().join("aoi_k3.toml");
    let o = run(&["run", "--config", cfg.to_str().unwrap(), "--out", blocker.join("sub").to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(4));
}
