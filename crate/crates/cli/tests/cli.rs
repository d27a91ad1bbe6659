use std::fs;
use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use serde_json::{json, Value};
use tempfile::TempDir;

fn segpipe(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_segpipe"))
        .args(args)
        .output()
        .expect("binary runs")
}

fn code(out: &Output) -> i32 {
    out.status.code().expect("exited normally")
}

fn stderr(out: &Output) -> String {
    String::from_utf8_lossy(&out.stderr).into_owned()
}

fn stdout(out: &Output) -> String {
    String::from_utf8_lossy(&out.stdout).into_owned()
}

fn generate(dir: &Path, name: &str, extra: &[&str]) -> PathBuf {
    let path = dir.join(name);
    let mut args = vec!["generate", "--out", path.to_str().unwrap()];
    args.extend_from_slice(extra);
    let out = segpipe(&args);
    assert_eq!(code(&out), 0, "{}", stderr(&out));
    path
}

fn config(dataset: &str) -> Value {
    json!({
        "dataset": dataset,
        "pipeline": [
            {"name": "seg", "kind": "segment", "width": 100, "overlap": 0.5},
            {"name": "feat", "kind": "features", "features": ["median", "min", "max", "std", "skew"]},
            {"name": "scale", "kind": "standard_scaler"}
        ],
        "estimator": {"kind": "krc", "gamma": 1.0 / 30.0, "lambda": 1e-3},
        "split": {"kind": "instance", "fraction": 0.25, "seed": 0},
        "output": "metrics.json"
    })
}

fn write_config(dir: &Path, name: &str, v: &Value) -> PathBuf {
    let path = dir.join(name);
    fs::write(&path, serde_json::to_string_pretty(v).unwrap()).unwrap();
    path
}

fn fit_eval(dir: &Path, v: &Value) -> (Output, Option<Value>) {
    let cfg = write_config(dir, "c.json", v);
    let out = segpipe(&["fit-eval", "--config", cfg.to_str().unwrap()]);
    let report = fs::read_to_string(dir.join("metrics.json"))
        .ok()
        .map(|s| serde_json::from_str(&s).unwrap());
    (out, report)
}

#[test]
fn generate_is_deterministic_and_balanced() {
    let dir = TempDir::new().unwrap();
    let a = generate(dir.path(), "a.ndjson", &["--seed", "4"]);
    let b = generate(dir.path(), "b.ndjson", &["--seed", "4"]);
    let c = generate(dir.path(), "c.ndjson", &["--seed", "5"]);
    let bytes = fs::read(&a).unwrap();
    assert_eq!(bytes, fs::read(&b).unwrap());
    assert_ne!(bytes, fs::read(&c).unwrap());

    let text = String::from_utf8(bytes).unwrap();
    let mut counts = [0usize; 7];
    for line in text.lines() {
        let v: Value = serde_json::from_str(line).unwrap();
        let x = v["X"].as_array().unwrap();
        assert_eq!(x.len(), 200);
        assert!(x.iter().all(|row| row.as_array().unwrap().len() == 6));
        counts[v["y"].as_u64().unwrap() as usize] += 1;
    }
    assert_eq!(counts, [20; 7]);

    let uneven = generate(
        dir.path(),
        "u.ndjson",
        &["--n", "10", "--classes", "3", "--t", "8"],
    );
    let labels: Vec<u64> = fs::read_to_string(uneven)
        .unwrap()
        .lines()
        .map(|l| {
            serde_json::from_str::<Value>(l).unwrap()["y"]
                .as_u64()
                .unwrap()
        })
        .collect();
    for k in 0..3 {
        let n = labels.iter().filter(|&&l| l == k).count() as f64;
        assert!((n - 10.0 / 3.0).abs() <= 1.0);
    }

    let one = generate(
        dir.path(),
        "one.ndjson",
        &["--n", "5", "--classes", "1", "--t", "4"],
    );
    assert!(fs::read_to_string(one)
        .unwrap()
        .lines()
        .all(|l| l.ends_with("\"y\":0}")));
}

#[test]
fn inspect_summaries() {
    let dir = TempDir::new().unwrap();
    let data = generate(dir.path(), "d.ndjson", &[]);
    let out = segpipe(&["inspect", data.to_str().unwrap()]);
    assert_eq!(code(&out), 0);
    let text = stdout(&out);
    assert!(text.contains("N: 140\n"), "{text}");
    assert!(text.contains("d: 6\n"));
    assert!(text.contains("T: min 200 / median 200 / max 200\n"));
    assert!(text.contains("0: 20, 1: 20"));

    let mixed = dir.path().join("mixed.ndjson");
    fs::write(
        &mixed,
        "{\"X\":[[1],[2],[3],[4],[5]],\"y\":0.5}\n{\"X\":[[1],[2],[3],[4],[5],[6],[7]],\"y\":1.5}\n",
    )
    .unwrap();
    let text = stdout(&segpipe(&["inspect", mixed.to_str().unwrap()]));
    assert!(text.contains("T: min 5 / median 6 / max 7\n"), "{text}");
    assert!(text.contains("class histogram: n/a\n"));

    let bad = dir.path().join("bad.ndjson");
    fs::write(&bad, "{\"X\": [[1, 2], [3]], \"y\": 0}\n").unwrap();
    assert_eq!(code(&segpipe(&["inspect", bad.to_str().unwrap()])), 2);
}

#[test]
fn fit_eval_reports_counts_and_echo_reproduces() {
    let dir = TempDir::new().unwrap();
    generate(dir.path(), "d.ndjson", &[]);
    let (out, report) = fit_eval(dir.path(), &config("d.ndjson"));
    assert_eq!(code(&out), 0, "{}", stderr(&out));
    assert!(stdout(&out).starts_with("accuracy "));
    let report = report.unwrap();
    assert_eq!(report["train_segments"], 315);
    assert_eq!(report["test_segments"], 105);
    assert_eq!(report["feature_names"].as_array().unwrap().len(), 30);
    assert_eq!(report["version"], env!("CARGO_PKG_VERSION"));
    let score = report["score"].as_f64().unwrap();
    assert!((0.0..=1.0).contains(&score));
    assert_eq!(report["per_class"].as_array().unwrap().len(), 7);
    for stage in report["timings"]["fit"].as_array().unwrap() {
        assert!(stage["seconds"].as_f64().unwrap() >= 0.0);
    }

    // the echoed config carries absolute paths, so it runs from anywhere
    let echo = report["config"].clone();
    assert!(Path::new(echo["dataset"].as_str().unwrap()).is_absolute());
    let elsewhere = TempDir::new().unwrap();
    let cfg = write_config(elsewhere.path(), "echo.json", &echo);
    fs::remove_file(dir.path().join("metrics.json")).unwrap();
    let out = segpipe(&["fit-eval", "--config", cfg.to_str().unwrap()]);
    assert_eq!(code(&out), 0, "{}", stderr(&out));
    let again: Value =
        serde_json::from_str(&fs::read_to_string(dir.path().join("metrics.json")).unwrap())
            .unwrap();
    assert_eq!(again["score"], report["score"]);
    assert_eq!(again["config"], echo);
}

#[test]
fn fit_eval_with_grid_and_kfold() {
    let dir = TempDir::new().unwrap();
    generate(dir.path(), "d.ndjson", &["--n", "28"]);
    let mut v = config("d.ndjson");
    v["cv_folds"] = json!(2);
    // written by hand: the grid's key order in the file fixes the product order
    let text = serde_json::to_string(&v).unwrap().replacen(
        '{',
        r#"{"grid": {"seg.width": [50, 100], "seg.overlap": [0.0, 0.5]}, "#,
        1,
    );
    let cfg = dir.path().join("c.json");
    fs::write(&cfg, text).unwrap();
    let out = segpipe(&["fit-eval", "--config", cfg.to_str().unwrap()]);
    assert_eq!(code(&out), 0, "{}", stderr(&out));
    let report: Value =
        serde_json::from_str(&fs::read_to_string(dir.path().join("metrics.json")).unwrap())
            .unwrap();
    let table = report["grid_search"]["table"].as_array().unwrap();
    assert_eq!(table.len(), 4);
    assert_eq!(
        table[1]["params"],
        json!({"seg.width": 50, "seg.overlap": 0.5})
    );
    assert!(report["grid_search"]["best_params"].is_object());

    let mut v = config("d.ndjson");
    v["split"] = json!({"kind": "kfold", "k": 2});
    v["pipeline"][0]["width"] = json!(50);
    let (out, report) = fit_eval(dir.path(), &v);
    assert_eq!(code(&out), 0, "{}", stderr(&out));
    assert_eq!(report.unwrap()["folds"].as_array().unwrap().len(), 2);
}

#[test]
fn string_labels_are_mapped_and_reported() {
    let dir = TempDir::new().unwrap();
    let mut lines = String::new();
    for i in 0..12 {
        let label = ["walk", "run", "sit"][i % 3];
        let rows: Vec<Vec<f64>> = (0..20)
            .map(|t| vec![((t * (i % 3 + 1)) % 5) as f64])
            .collect();
        lines += &format!("{}\n", json!({"X": rows, "y": label}));
    }
    fs::write(dir.path().join("d.ndjson"), lines).unwrap();
    let mut v = config("d.ndjson");
    v["pipeline"][0]["width"] = json!(10);
    v["estimator"] = json!({"kind": "nearest_centroid"});
    let (out, report) = fit_eval(dir.path(), &v);
    assert_eq!(code(&out), 0, "{}", stderr(&out));
    let report = report.unwrap();
    assert_eq!(report["label_names"], json!(["run", "sit", "walk"]));
    assert!(report["per_class"]
        .as_array()
        .unwrap()
        .iter()
        .all(|c| c["name"].is_string()));
}

#[test]
fn exit_codes() {
    let dir = TempDir::new().unwrap();
    generate(dir.path(), "d.ndjson", &["--n", "14"]);

    // missing dataset: data error naming the path
    let (out, _) = fit_eval(dir.path(), &config("nowhere.ndjson"));
    assert_eq!(code(&out), 2);
    assert!(stderr(&out).contains("nowhere.ndjson"));

    // malformed JSON
    let cfg = dir.path().join("broken.json");
    fs::write(&cfg, "{\"dataset\": ").unwrap();
    let out = segpipe(&["fit-eval", "--config", cfg.to_str().unwrap()]);
    assert_eq!(code(&out), 1);
    assert!(stderr(&out).contains("line"), "{}", stderr(&out));

    // unknown field
    let mut v = config("d.ndjson");
    v["pipeline"][0]["widht"] = json!(3);
    let (out, _) = fit_eval(dir.path(), &v);
    assert_eq!(code(&out), 1);
    assert!(stderr(&out).contains("widht"));

    // unknown feature only surfaces when fitting, still a config error
    let mut v = config("d.ndjson");
    v["pipeline"][1]["features"] = json!(["entropy"]);
    let (out, _) = fit_eval(dir.path(), &v);
    assert_eq!(code(&out), 1, "{}", stderr(&out));

    // unknown grid path
    let mut v = config("d.ndjson");
    v["grid"] = json!({"seg.size": [1]});
    assert_eq!(code(&fit_eval(dir.path(), &v).0), 1);

    // estimator not last
    let mut v = config("d.ndjson");
    v["pipeline"]
        .as_array_mut()
        .unwrap()
        .push(json!({"name": "pad", "kind": "pad", "length": 3}));
    assert_eq!(code(&fit_eval(dir.path(), &v).0), 1);

    // window wider than every series
    let mut v = config("d.ndjson");
    v["pipeline"][0]["width"] = json!(500);
    let (out, _) = fit_eval(dir.path(), &v);
    assert_eq!(code(&out), 2, "{}", stderr(&out));

    // unparsable data
    fs::write(dir.path().join("bad.ndjson"), "not json\n").unwrap();
    assert_eq!(code(&fit_eval(dir.path(), &config("bad.ndjson")).0), 2);

    // bad command line
    assert_eq!(code(&segpipe(&["fit-eval"])), 1);
    assert_eq!(
        code(&segpipe(&["generate", "--out", "x", "--classes", "0"])),
        1
    );
    assert_eq!(code(&segpipe(&["--version"])), 0);
}

#[test]
fn bench_reports_repeats() {
    let dir = TempDir::new().unwrap();
    generate(dir.path(), "d.ndjson", &["--n", "14", "--t", "100"]);
    let mut v = config("d.ndjson");
    v["pipeline"][0]["width"] = json!(50);
    let cfg = write_config(dir.path(), "c.json", &v);
    let report = dir.path().join("bench.json");
    let out = segpipe(&[
        "bench",
        "--config",
        cfg.to_str().unwrap(),
        "--repeats",
        "5",
        "--sequential",
        "--output",
        report.to_str().unwrap(),
    ]);
    assert_eq!(code(&out), 0, "{}", stderr(&out));
    let report: Value = serde_json::from_str(&fs::read_to_string(report).unwrap()).unwrap();
    assert_eq!(report["total"]["samples"].as_array().unwrap().len(), 5);
    assert!(
        report["total"]["median"].as_f64().unwrap() >= report["total"]["min"].as_f64().unwrap()
    );
    assert_eq!(report["exec"], "sequential");
    assert_eq!(report["stages"].as_array().unwrap().len(), 4);
    // bench never writes the metrics report
    assert!(!dir.path().join("metrics.json").exists());
}
