use std::fs;
use std::path::Path;
use std::process::{Command, Output};

use serde_json::Value;
use tempfile::TempDir;

fn tool(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_zonalflow")).args(args).env_remove("TOOL_THREADS").output().unwrap()
}

fn run_with_config(dir: &TempDir, name: &str, config: &str, id: &str, extra: &[&str]) -> (Output, std::path::PathBuf) {
    let cfg = dir.path().join(format!("{name}.cfg"));
    fs::write(&cfg, config).unwrap();
    let out = dir.path().join(name);
    let mut args = vec!["run", id, "--config", cfg.to_str().unwrap(), "--out", out.to_str().unwrap()];
    args.extend_from_slice(extra);
    (tool(&args), out)
}

fn json_file(path: &Path) -> Value {
    serde_json::from_str(&fs::read_to_string(path).unwrap()).unwrap()
}

#[test]
fn list_prints_the_registry() {
    let out = tool(&["list"]);
    assert_eq!(out.status.code(), Some(0));
    let text = String::from_utf8(out.stdout).unwrap();
    assert_eq!(text.lines().count(), 14);
    assert!(text.contains("exp_zygmund_s1") && text.contains("check_gauss_sums"));
}

#[test]
fn usage_errors_exit_with_two() {
    let dir = TempDir::new().unwrap();
    assert_eq!(tool(&["run", "exp_nonexistent"]).status.code(), Some(2));
    assert_eq!(tool(&["frobnicate"]).status.code(), Some(2));
    let (out, _) = run_with_config(&dir, "bad", "k_max 100", "check_kadec_gap", &[]);
    assert_eq!(out.status.code(), Some(2));
    assert!(!out.stderr.is_empty());
    let (out, _) = run_with_config(&dir, "unknown_key", "bogus = 1", "check_kadec_gap", &[]);
    assert_eq!(out.status.code(), Some(2));
    let missing = dir.path().join("missing.cfg");
    assert_eq!(tool(&["run", "check_kadec_gap", "--config", missing.to_str().unwrap()]).status.code(), Some(2));
    let threads =
        Command::new(env!("CARGO_BIN_EXE_zonalflow")).args(["list"]).env("TOOL_THREADS", "0").output().unwrap();
    assert_eq!(threads.status.code(), Some(2));
}

#[test]
fn run_writes_consistent_records() {
    let dir = TempDir::new().unwrap();
    let (out, path) = run_with_config(&dir, "kadec", "k_max = 1000", "check_kadec_gap", &[]);
    assert_eq!(out.status.code(), Some(0), "{}", String::from_utf8_lossy(&out.stderr));

    let results = json_file(&path.join("results.json"));
    let runs = results.as_array().unwrap();
    assert_eq!(runs.len(), 1);
    let keys: Vec<&str> = runs[0].as_object().unwrap().keys().map(String::as_str).collect();
    let mut expected = vec!["experiment", "params", "series", "slope", "r2", "predicted", "tolerance", "verdict"];
    expected.sort_unstable();
    let mut got = keys.clone();
    got.sort_unstable();
    assert_eq!(got, expected);
    assert_eq!(runs[0]["verdict"], "pass");

    let mut rows = csv::Reader::from_path(path.join("rows.csv")).unwrap();
    let series = runs[0]["series"].as_array().unwrap();
    let records: Vec<csv::StringRecord> = rows.records().map(Result::unwrap).collect();
    assert_eq!(records.len(), series.len());
    for (rec, point) in records.iter().zip(series) {
        assert_eq!(rec[2].parse::<f64>().unwrap(), point[0].as_f64().unwrap());
        assert_eq!(rec[3].parse::<f64>().unwrap(), point[1].as_f64().unwrap());
    }

    let tsv = fs::read_to_string(path.join("plotdata").join("check_kadec_gap.tsv")).unwrap();
    let first: Vec<f64> = tsv.lines().next().unwrap().split('\t').map(|v| v.parse().unwrap()).collect();
    assert!((first[0] - series[0][0].as_f64().unwrap().log10()).abs() < 1e-15);

    let manifest = json_file(&path.join("manifest.json"));
    assert_eq!(manifest["exit_code"], 0);
    assert_eq!(manifest["experiments"][0]["params"]["k_max"], 1000);
}

#[test]
fn same_seed_gives_identical_results() {
    let dir = TempDir::new().unwrap();
    let cfg = "k_values = 8, 16, 32, 64, 128\ntrials = 3";
    let (a, pa) = run_with_config(&dir, "a", cfg, "exp_zygmund_s1", &["--seed", "5"]);
    let (b, pb) = run_with_config(&dir, "b", cfg, "exp_zygmund_s1", &["--seed", "5"]);
    let (c, pc) = run_with_config(&dir, "c", cfg, "exp_zygmund_s1", &["--seed", "6"]);
    assert_eq!(a.status.code(), Some(0));
    assert_eq!(b.status.code(), Some(0));
    assert_eq!(c.status.code(), Some(0));
    let ra = fs::read(pa.join("results.json")).unwrap();
    assert_eq!(ra, fs::read(pb.join("results.json")).unwrap());
    assert_eq!(fs::read(pa.join("rows.csv")).unwrap(), fs::read(pb.join("rows.csv")).unwrap());
    assert_ne!(ra, fs::read(pc.join("results.json")).unwrap());
    assert_eq!(json_file(&pa.join("results.json"))[0]["params"]["seed"], 5);
}

#[test]
fn short_series_is_inconclusive() {
    let dir = TempDir::new().unwrap();
    let (out, _) = run_with_config(&dir, "short", "k_values = [8, 16, 32]\ntrials = 2", "exp_zygmund_s1", &[]);
    assert_eq!(out.status.code(), Some(3));
}

#[test]
fn empty_suite_passes() {
    let dir = TempDir::new().unwrap();
    let cfg = dir.path().join("suite.cfg");
    fs::write(&cfg, "experiments =\n").unwrap();
    let out_dir = dir.path().join("suite");
    let out = tool(&["suite", "--config", cfg.to_str().unwrap(), "--out", out_dir.to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(0));
    let manifest = json_file(&out_dir.join("manifest.json"));
    assert_eq!(manifest["experiments"].as_array().unwrap().len(), 0);
    assert_eq!(json_file(&out_dir.join("results.json")), Value::Array(vec![]));
}

#[test]
fn suite_with_a_failing_experiment_exits_one() {
    let dir = TempDir::new().unwrap();
    let cfg = dir.path().join("suite.json");
    fs::write(
        &cfg,
        r#"{"experiments": ["check_kadec_gap", "exp_maximal_blowup"],
            "check_kadec_gap": {"k_max": 100},
            "exp_maximal_blowup": {"n_values": [3]}}"#,
    )
    .unwrap();
    let out_dir = dir.path().join("suite");
    let out = tool(&["suite", "--config", cfg.to_str().unwrap(), "--out", out_dir.to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(1));
    let text = String::from_utf8(out.stdout).unwrap();
    assert!(text.contains("| experiment | claim | verdict |"));
    assert!(text.contains("| check_kadec_gap |") && text.contains("| pass |"));
    let manifest = json_file(&out_dir.join("manifest.json"));
    let verdicts: Vec<&str> =
        manifest["experiments"].as_array().unwrap().iter().map(|e| e["verdict"].as_str().unwrap()).collect();
    assert_eq!(verdicts, ["pass", "fail"]);
    assert!(out_dir.join("plotdata").join("exp_maximal_blowup__minimum_n3.tsv").exists());
}
