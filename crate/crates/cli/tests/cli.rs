use std::fs;
use std::path::Path;
use std::process::{Command, Output};

use serde_json::Value;
use tempfile::TempDir;

fn ordrel(dir: &Path, args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_ordrel"))
        .current_dir(dir)
        .args(args)
        .output()
        .expect("binary runs")
}

fn ok(dir: &Path, args: &[&str]) -> Output {
    let out = ordrel(dir, args);
    assert!(
        out.status.success(),
        "{args:?} failed: {}",
        String::from_utf8_lossy(&out.stderr)
    );
    out
}

fn json(path: &Path) -> Value {
    serde_json::from_str(&fs::read_to_string(path).unwrap()).unwrap()
}

fn gen_small(dir: &Path, name: &str) {
    ok(
        dir,
        &["gen", "--points", "60", "--strong", "2", "--weak", "2", "--irrelevant", "2", "--seed", "3", "--out", name],
    );
}

#[test]
fn gen_writes_requested_shape() {
    let tmp = TempDir::new().unwrap();
    ok(
        tmp.path(),
        &["gen", "--points", "150", "--strong", "3", "--weak", "4", "--irrelevant", "3", "--classes", "3", "--seed", "7", "--out", "d.csv"],
    );
    let text = fs::read_to_string(tmp.path().join("d.csv")).unwrap();
    let lines: Vec<&str> = text.lines().collect();
    assert_eq!(lines[0], "f1,f2,f3,f4,f5,f6,f7,f8,f9,f10,label");
    assert_eq!(lines.len(), 151);
    assert!(lines[1..].iter().all(|l| l.split(',').count() == 11));

    let truth = json(&tmp.path().join("d.truth.json"));
    assert_eq!(truth["truth"]["strong"].as_array().unwrap().len(), 3);
    assert_eq!(truth["truth"]["weak"].as_array().unwrap().len(), 4);
    assert_eq!(truth["manifest"]["command"], "gen");
}

#[test]
fn gen_is_deterministic() {
    let tmp = TempDir::new().unwrap();
    gen_small(tmp.path(), "a.csv");
    gen_small(tmp.path(), "b.csv");
    let read = |n: &str| fs::read(tmp.path().join(n)).unwrap();
    assert_eq!(read("a.csv"), read("b.csv"));
}

#[test]
fn gen_rejects_too_few_points() {
    let tmp = TempDir::new().unwrap();
    let out = ordrel(tmp.path(), &["gen", "--points", "4", "--strong", "1", "--classes", "3", "--out", "x.csv"]);
    assert_eq!(out.status.code(), Some(2));
    assert!(!tmp.path().join("x.csv").exists());
}

#[test]
fn relevance_recovers_generated_structure() {
    let tmp = TempDir::new().unwrap();
    gen_small(tmp.path(), "d.csv");
    ok(tmp.path(), &["relevance", "--data", "d.csv", "--out", "r.json", "--plot-data", "p.csv"]);
    let truth = json(&tmp.path().join("d.truth.json"));
    let report = json(&tmp.path().join("r.json"));
    let classes: Vec<String> = report["intervals"]
        .as_array()
        .unwrap()
        .iter()
        .map(|r| r["class"].as_str().unwrap().to_string())
        .collect();
    for i in truth["truth"]["irrelevant"].as_array().unwrap() {
        assert_eq!(classes[i.as_u64().unwrap() as usize], "irrelevant");
    }
    for i in truth["truth"]["strong"].as_array().unwrap() {
        assert_eq!(classes[i.as_u64().unwrap() as usize], "strong");
    }
    assert_eq!(report["manifest"]["command"], "relevance");
    assert_eq!(report["manifest"]["params"]["analysis"]["delta"], 0.05);

    let csv = fs::read_to_string(tmp.path().join("r.csv")).unwrap();
    assert_eq!(csv.lines().next().unwrap(), "feature,name,lower,upper,class");
    assert_eq!(csv.lines().count(), 7);
    let plot = fs::read_to_string(tmp.path().join("p.csv")).unwrap();
    assert_eq!(plot.lines().next().unwrap(), "feature,name,lower,upper,class,threshold");
}

fn bounds(report: &Value) -> Vec<(f64, f64)> {
    report["intervals"]
        .as_array()
        .unwrap()
        .iter()
        .map(|r| (r["lower"].as_f64().unwrap(), r["upper"].as_f64().unwrap()))
        .collect()
}

#[test]
fn larger_delta_widens_intervals() {
    let tmp = TempDir::new().unwrap();
    gen_small(tmp.path(), "d.csv");
    let common = ["relevance", "--data", "d.csv", "--c-grid", "1", "--d", "10"];
    let mut a = common.to_vec();
    a.extend(["--delta", "0", "--out", "a.json"]);
    let mut b = common.to_vec();
    b.extend(["--delta", "0.5", "--out", "b.json"]);
    ok(tmp.path(), &a);
    ok(tmp.path(), &b);
    let (narrow, wide) = (bounds(&json(&tmp.path().join("a.json"))), bounds(&json(&tmp.path().join("b.json"))));
    for ((lo0, hi0), (lo1, hi1)) in narrow.iter().zip(&wide) {
        assert!(lo1 <= &(lo0 + 1e-6) && hi1 >= &(hi0 - 1e-6), "{lo0} {hi0} vs {lo1} {hi1}");
    }
}

#[test]
fn raw_units_rescale_by_feature_std() {
    let tmp = TempDir::new().unwrap();
    fs::write(
        tmp.path().join("s.csv"),
        "a,label\n-4,1\n-2,1\n2,2\n4,2\n",
    )
    .unwrap();
    let base = ["relevance", "--data", "s.csv", "--c-grid", "1", "--d", "5", "--delta", "0"];
    let mut std_args = base.to_vec();
    std_args.extend(["--out", "std.json"]);
    let mut raw_args = base.to_vec();
    raw_args.extend(["--out", "raw.json", "--raw-units"]);
    ok(tmp.path(), &std_args);
    ok(tmp.path(), &raw_args);
    let s = bounds(&json(&tmp.path().join("std.json")))[0];
    let r = bounds(&json(&tmp.path().join("raw.json")))[0];
    // Population std of the column is sqrt(10).
    let sd = 10f64.sqrt();
    assert!((r.0 - s.0 / sd).abs() < 1e-9 && (r.1 - s.1 / sd).abs() < 1e-9);
}

#[test]
fn input_errors_exit_with_two() {
    let tmp = TempDir::new().unwrap();
    let out = ordrel(tmp.path(), &["relevance", "--data", "missing.csv", "--out", "r.json"]);
    assert_eq!(out.status.code(), Some(2));

    fs::write(tmp.path().join("bad.csv"), "f1,f2,label\n1,2,1\n3,oops,2\n").unwrap();
    let out = ordrel(tmp.path(), &["relevance", "--data", "bad.csv", "--out", "r.json"]);
    assert_eq!(out.status.code(), Some(2));
    let err = String::from_utf8_lossy(&out.stderr);
    assert!(err.contains("line 3, column 2"), "{err}");

    let out = ordrel(tmp.path(), &["relevance", "--out", "r.json"]);
    assert_eq!(out.status.code(), Some(2));
}

#[test]
fn replay_reproduces_relevance_outputs() {
    let tmp = TempDir::new().unwrap();
    gen_small(tmp.path(), "d.csv");
    ok(tmp.path(), &["relevance", "--data", "d.csv", "--out", "r.json", "--plot-data", "p.csv", "--d", "20"]);
    ok(tmp.path(), &["replay", "--manifest", "r.json", "--out-dir", "again"]);
    for f in ["r.json", "r.csv", "p.csv"] {
        assert_eq!(
            fs::read(tmp.path().join(f)).unwrap(),
            fs::read(tmp.path().join("again").join(f)).unwrap(),
            "{f}"
        );
    }
}

#[test]
fn replay_reproduces_gen_and_bench_outputs() {
    let tmp = TempDir::new().unwrap();
    gen_small(tmp.path(), "d.csv");
    ok(tmp.path(), &["replay", "--manifest", "d.truth.json", "--out-dir", "g"]);
    for f in ["d.csv", "d.truth.json"] {
        assert_eq!(fs::read(tmp.path().join(f)).unwrap(), fs::read(tmp.path().join("g").join(f)).unwrap());
    }

    fs::write(tmp.path().join("s.toml"), "n_points = 40\nn_strong = 1\nn_irrelevant = 1\n").unwrap();
    ok(tmp.path(), &["bench", "--spec", "s.toml", "--runs", "2", "--d", "10", "--out", "b.json"]);
    ok(tmp.path(), &["replay", "--manifest", "b.json", "--out-dir", "b"]);
    for f in ["b.json", "b.csv"] {
        assert_eq!(fs::read(tmp.path().join(f)).unwrap(), fs::read(tmp.path().join("b").join(f)).unwrap());
    }
}

#[test]
fn single_run_reports_zero_stddev() {
    let tmp = TempDir::new().unwrap();
    fs::write(tmp.path().join("s.toml"), "n_points = 40\nn_strong = 1\nn_irrelevant = 1\n").unwrap();
    ok(tmp.path(), &["bench", "--spec", "s.toml", "--runs", "1", "--d", "10", "--out", "b.json"]);
    let result = json(&tmp.path().join("b.json"));
    assert_eq!(result["result"]["f_measure"]["std"], 0.0);
    assert_eq!(result["result"]["runs"].as_array().unwrap().len(), 1);
    let summary = fs::read_to_string(tmp.path().join("b.csv")).unwrap();
    assert!(summary.starts_with("n_points,n_strong,n_weak,n_irrelevant,runs,f_measure_mean,f_measure_std\n"));
}

#[test]
fn bench_on_dataset_reports_mmae_and_set_sizes() {
    let tmp = TempDir::new().unwrap();
    ok(
        tmp.path(),
        &["gen", "--points", "60", "--strong", "2", "--irrelevant", "1", "--noise", "0", "--out", "d.csv"],
    );
    ok(tmp.path(), &["bench", "--data", "d.csv", "--folds", "3", "--d", "10", "--out", "b.json"]);
    let result = json(&tmp.path().join("b.json"));
    assert_eq!(result["result"]["kind"], "benchmark");
    assert_eq!(result["result"]["runs"].as_array().unwrap().len(), 3);
    assert!(result["result"]["mmae"]["mean"].as_f64().unwrap() < 0.2);
    let summary = fs::read_to_string(tmp.path().join("b.csv")).unwrap();
    assert!(summary.starts_with("dataset,folds,mmae_mean,mmae_std,strong_mean,weak_mean\nd,3,"));
}

#[test]
fn flags_override_config_file() {
    let tmp = TempDir::new().unwrap();
    fs::write(
        tmp.path().join("g.toml"),
        "points = 30\nstrong = 1\nirrelevant = 1\nseed = 3\nout = \"c.csv\"\njobs = 1\n",
    )
    .unwrap();
    ok(tmp.path(), &["--config", "g.toml", "gen", "--seed", "9"]);
    let truth = json(&tmp.path().join("c.truth.json"));
    assert_eq!(truth["manifest"]["params"]["spec"]["seed"], 9);
    assert_eq!(truth["manifest"]["params"]["spec"]["n_points"], 30);

    fs::write(tmp.path().join("bad.toml"), "poinst = 30\n").unwrap();
    let out = ordrel(tmp.path(), &["--config", "bad.toml", "gen", "--points", "30", "--strong", "1", "--out", "x.csv"]);
    assert_eq!(out.status.code(), Some(2));
}

#[test]
fn label_column_and_relabel_assist_ingestion() {
    let tmp = TempDir::new().unwrap();
    let mut text = String::from("quality,x,y\n");
    for i in 0..12 {
        let q = 5 + i / 4;
        text.push_str(&format!("{q},{},{}\n", i as f64 + 0.5 * (i % 2) as f64, (i * 7 % 5) as f64));
    }
    fs::write(tmp.path().join("w.csv"), text).unwrap();
    let out = ordrel(tmp.path(), &["relevance", "--data", "w.csv", "--label-col", "quality", "--out", "r.json"]);
    assert_eq!(out.status.code(), Some(2));
    ok(
        tmp.path(),
        &["relevance", "--data", "w.csv", "--label-col", "quality", "--relabel", "--c-grid", "1", "--d", "5", "--out", "r.json"],
    );
    let report = json(&tmp.path().join("r.json"));
    assert_eq!(report["feature_names"], serde_json::json!(["x", "y"]));
}
