use std::fs;
use std::path::Path;
use std::process::{Command, Output};

use serde_json::Value;

fn synres(args: &[&str]) -> Output {
    let out = Command::new(env!("CARGO_BIN_EXE_synres")).args(args).output().unwrap();
    assert!(out.status.success(), "{args:?}: {}", String::from_utf8_lossy(&out.stderr));
    out
}

fn json(out: &Output) -> Value {
    serde_json::from_slice(&out.stdout).unwrap()
}

fn path(dir: &Path, name: &str) -> String {
    dir.join(name).to_str().unwrap().to_owned()
}

#[test]
fn codegen_then_validate() {
    let dir = tempfile::tempdir().unwrap();
    let code = path(dir.path(), "code.json");
    synres(&["codegen", "--layout", "rotated", "--distance", "5", "--out", &code]);
    let text = String::from_utf8(synres(&["validate", "--code", &code]).stdout).unwrap();
    assert!(!text.to_lowercase().contains("fail"), "{text}");
}

#[test]
fn simulate_resample_and_ingest_agree() {
    let dir = tempfile::tempdir().unwrap();
    let batch = path(dir.path(), "batch.jsonl");
    synres(&["simulate", "--code", "rotated-d3", "--p", "0.1", "--n-samples", "20000", "--seed", "4", "--with-gap", "--out", &batch]);
    assert_eq!(fs::read_to_string(&batch).unwrap().lines().count(), 20001);

    let sr = json(&synres(&["resample", "--batch", &batch, "--alpha", "2", "--seed", "0"]));
    let ingest = json(&synres(&["ingest", "--in", &batch, "--alpha", "2", "--c", "0.4", "--seed", "0"]));
    let rows = ingest.as_array().unwrap();
    let sr_row = rows.iter().find(|r| r["method"] == "sr-empirical").unwrap();
    assert_eq!(sr_row["value"], sr["value"]);
    assert_eq!(sr_row["acceptance"], sr["acceptance"]);
    assert!(rows.iter().any(|r| r["method"] == "cgps"));
    assert!(rows.iter().any(|r| r["method"] == "ps"));
}

#[test]
fn simulate_is_reproducible() {
    let dir = tempfile::tempdir().unwrap();
    let (a, b) = (path(dir.path(), "a.jsonl"), path(dir.path(), "b.jsonl"));
    for (f, threads) in [(&a, "1"), (&b, "3")] {
        let out = Command::new(env!("CARGO_BIN_EXE_synres"))
            .env("RAYON_NUM_THREADS", threads)
            .args(["simulate", "--code", "unrotated-d5", "--p", "0.1", "--n-samples", "5000", "--seed", "9", "--decoder", "mld", "--out", f])
            .output()
            .unwrap();
        assert!(out.status.success());
    }
    assert_eq!(fs::read(&a).unwrap(), fs::read(&b).unwrap());
}

#[test]
fn exact_failure_orders_with_alpha() {
    let out = json(&synres(&["exact", "--code", "rotated-d3", "--p", "0.1", "--alpha", "1,2,3", "--what", "failure", "--decoder", "mwpm"]));
    let text = out.to_string();
    let values: Vec<f64> = out.as_array().unwrap().iter().map(|r| r["failure"].as_f64().unwrap()).collect();
    assert_eq!(values.len(), 3, "{text}");
    assert!(values[0] > values[1] && values[1] > values[2], "{text}");
}

#[test]
fn joint_csv_has_every_syndrome() {
    let dir = tempfile::tempdir().unwrap();
    let csv = path(dir.path(), "joint.csv");
    synres(&["exact", "--code", "rotated-d3", "--p", "0.1", "--what", "joint", "--format", "csv", "--out", &csv]);
    assert_eq!(fs::read_to_string(&csv).unwrap().lines().count(), 1 + 16);
}

#[test]
fn crossing_of_two_lines() {
    let dir = tempfile::tempdir().unwrap();
    let (a, b) = (path(dir.path(), "a.csv"), path(dir.path(), "b.csv"));
    fs::write(&a, "p,value\n0.1,0.0\n0.2,1.0\n").unwrap();
    fs::write(&b, "p,value\n0.1,1.0\n0.2,0.0\n").unwrap();
    let text = String::from_utf8(synres(&["crossing", "--a", &a, "--b", &b]).stdout).unwrap();
    let x: f64 =
        text.trim().trim_start_matches(|c: char| !c.is_ascii_digit()).split(|c: char| !(c.is_ascii_digit() || c == '.')).next().unwrap().parse().unwrap();
    assert!((x - 0.15).abs() < 1e-12, "{text}");
}

#[test]
fn run_config_writes_rows_and_manifest() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("exp.toml");
    fs::write(
        &cfg,
        r#"
layout = "rotated"
distances = [3]
p_grid = [0.0, 0.1]
samples = 2000
seed = 1
methods = ["plain", "ps", "sr-empirical"]
alphas = [2]

[output]
csv = "rows.csv"
manifest = "manifest.json"
"#,
    )
    .unwrap();
    synres(&["run", "--config", cfg.to_str().unwrap()]);
    let rows = fs::read_to_string(dir.path().join("rows.csv")).unwrap();
    assert_eq!(rows.lines().count(), 1 + 2 * 3);
    let manifest: Value = serde_json::from_str(&fs::read_to_string(dir.path().join("manifest.json")).unwrap()).unwrap();
    assert!(manifest["jobs"].as_array().is_some_and(|j| !j.is_empty()));

    let first = fs::read(dir.path().join("rows.csv")).unwrap();
    synres(&["run", "--config", cfg.to_str().unwrap()]);
    assert_eq!(fs::read(dir.path().join("rows.csv")).unwrap(), first);
}

#[test]
fn bad_input_fails_cleanly() {
    let out = Command::new(env!("CARGO_BIN_EXE_synres")).args(["simulate", "--code", "rotated-d3", "--p", "1.5", "--n-samples", "10"]).output().unwrap();
    assert!(!out.status.success());
    assert!(!out.stderr.is_empty());
}
