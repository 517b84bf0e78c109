use std::fs;
use std::path::Path;
use std::process::{Command, Output};

use serde_json::Value;

fn pprlab(out: &Path, args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_pprlab"))
        .arg("--out-dir")
        .arg(out)
        .args(args)
        .output()
        .unwrap()
}

fn json(out: &Path, args: &[&str]) -> Value {
    let output = pprlab(out, args);
    assert!(output.status.success(), "{}", String::from_utf8_lossy(&output.stderr));
    serde_json::from_slice(&output.stdout).unwrap()
}

const SMALL: &[&str] = &["--n", "300", "--m", "60", "--k", "6", "--p", "0.05", "--q", "0.15", "--seed", "4"];

fn with(base: &[&'static str], extra: &[&'static str]) -> Vec<&'static str> {
    base.iter().chain(extra).copied().collect()
}

#[test]
fn generate_then_score_the_saved_graph() {
    let dir = tempfile::tempdir().unwrap();
    let generated = json(dir.path(), &with(&["generate"], SMALL));
    let graph = dir.path().join("graph.txt");
    assert!(graph.exists());
    assert_eq!(generated["nodes"], 300);

    let graph_arg = graph.to_str().unwrap();
    let exact = json(dir.path(), &[&["ppr", "--graph", graph_arg], SMALL].concat());
    let csv_exact = fs::read_to_string(dir.path().join("ppr.csv")).unwrap();
    let dense = json(dir.path(), &[&["ppr", "--method", "dense", "--graph", graph_arg], SMALL].concat());
    let csv_dense = fs::read_to_string(dir.path().join("ppr.csv")).unwrap();
    assert_eq!(csv_exact.lines().count(), csv_dense.lines().count());
    assert!((exact["sum"].as_f64().unwrap() - 1.0).abs() < 1e-9);
    assert_eq!(exact["error"], dense["error"]);
}

#[test]
fn same_seed_same_graph_file() {
    let (a, b) = (tempfile::tempdir().unwrap(), tempfile::tempdir().unwrap());
    json(a.path(), &with(&["generate"], SMALL));
    json(b.path(), &with(&["generate"], SMALL));
    assert_eq!(fs::read(a.path().join("graph.txt")).unwrap(), fs::read(b.path().join("graph.txt")).unwrap());
}

#[test]
fn meanfield_reports_a_distribution() {
    let dir = tempfile::tempdir().unwrap();
    let v = json(dir.path(), &["meanfield", "--alpha", "0.8"]);
    assert!((v["total_mass"].as_f64().unwrap() - 1.0).abs() < 1e-12);
    assert!(v["gap"].as_f64().unwrap() > 0.0);
}

#[test]
fn opt_alpha_writes_the_gap_curve() {
    let dir = tempfile::tempdir().unwrap();
    let v = json(dir.path(), &["opt-alpha", "--m", "300"]);
    let alpha = v["alpha_opt"].as_f64().unwrap();
    assert!((0.45..=0.65).contains(&alpha), "{alpha}");
    let csv = fs::read_to_string(dir.path().join("gap.csv")).unwrap();
    assert_eq!(csv.lines().next(), Some("alpha,gap"));
    assert_eq!(csv.lines().count(), 1001);
}

#[test]
fn appr_writes_a_cluster() {
    let dir = tempfile::tempdir().unwrap();
    let v = json(dir.path(), &with(&["appr", "--alpha", "0.9", "--eps", "1e-6"], SMALL));
    let size = v["cluster_size"].as_u64().unwrap();
    let cluster = fs::read_to_string(dir.path().join("cluster.txt")).unwrap();
    assert_eq!(cluster.lines().count() as u64, size);
    assert!(size <= 60);
}

#[test]
fn config_file_is_overridden_by_flags() {
    let dir = tempfile::tempdir().unwrap();
    let config = dir.path().join("run.json");
    fs::write(&config, r#"{"n": 500, "m": 100, "k": 10, "alpha": 0.5}"#).unwrap();
    let config = config.to_str().unwrap();
    let from_file = json(dir.path(), &["--config", config, "meanfield"]);
    assert_eq!(from_file["alpha"], 0.5);
    let overridden = json(dir.path(), &["--config", config, "meanfield", "--alpha", "0.7"]);
    assert_eq!(overridden["alpha"], 0.7);
}

#[test]
fn diagnose_writes_a_trend_table() {
    let dir = tempfile::tempdir().unwrap();
    json(dir.path(), &["diagnose", "bound", "--n-values", "500,1000,2000", "--k", "1"]);
    let csv = fs::read_to_string(dir.path().join("diagnose.csv")).unwrap();
    let values: Vec<f64> = csv.lines().skip(1).map(|l| l.split(',').nth(1).unwrap().parse().unwrap()).collect();
    assert_eq!(csv.lines().next(), Some("n,value,stderr"));
    assert_eq!(values.len(), 3);
    assert!(values.iter().all(|&v| v > 0.0 && v.is_finite()), "{values:?}");
}

#[test]
fn experiment_list_and_gap_preset() {
    let dir = tempfile::tempdir().unwrap();
    let list = pprlab(dir.path(), &["experiment", "list"]);
    let text = String::from_utf8(list.stdout).unwrap();
    assert!(text.lines().any(|l| l.starts_with("fig1 ")));
    let v = json(dir.path(), &["experiment", "fig5"]);
    assert_eq!(v["preset"], "fig5");
    for file in ["rows.csv", "aggregate.json", "gap.csv", "gap.svg"] {
        assert!(dir.path().join("fig5").join(file).exists(), "{file}");
    }
}

#[test]
fn unknown_preset_fails() {
    let dir = tempfile::tempdir().unwrap();
    let output = pprlab(dir.path(), &["experiment", "fig9"]);
    assert!(!output.status.success());
    assert!(String::from_utf8_lossy(&output.stderr).contains("fig9"));
}
