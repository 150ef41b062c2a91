use std::path::Path;
use std::process::{Command, Output};

use serde_json::Value;

fn polygap(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_polygap")).args(args).output().expect("binary runs")
}

fn path(p: &Path) -> &str {
    p.to_str().unwrap()
}

fn json(out: &Output) -> Value {
    serde_json::from_slice(&out.stdout).expect("json on stdout")
}

fn edges(doc: &Value) -> Vec<f64> {
    doc["edges"]
        .as_array()
        .unwrap()
        .iter()
        .flat_map(|e| e.as_array().unwrap().iter().map(|v| v.as_f64().unwrap()))
        .collect()
}

#[test]
fn gen_is_deterministic() {
    let dir = tempfile::tempdir().unwrap();
    let (a, b) = (dir.path().join("a.json"), dir.path().join("b.json"));
    for p in [&a, &b] {
        let out = polygap(&["gen", "--n", "6", "--field", "real", "--seed", "1", "-o", path(p)]);
        assert!(out.status.success());
    }
    assert_eq!(std::fs::read(&a).unwrap(), std::fs::read(&b).unwrap());
    let doc: Value = serde_json::from_slice(&std::fs::read(&a).unwrap()).unwrap();
    assert_eq!(doc["n"], 6);
    assert_eq!(doc["field"], "real");
}

#[test]
fn gen_rejects_small_n() {
    let out = polygap(&["gen", "--n", "1"]);
    assert_eq!(out.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&out.stderr).contains("n must be ≥ 2"));
}

#[test]
fn unwritable_output_is_an_error() {
    let out = polygap(&["gen", "--n", "3", "-o", "/nonexistent-dir/x.json"]);
    assert_eq!(out.status.code(), Some(2));
}

#[test]
fn map_invert_map_round_trip() {
    let dir = tempfile::tempdir().unwrap();
    for field in ["real", "complex"] {
        let frame = dir.path().join(format!("{field}.json"));
        let poly = dir.path().join(format!("{field}-poly.json"));
        let back = dir.path().join(format!("{field}-back.json"));
        assert!(polygap(&["gen", "--n", "7", "--field", field, "--seed", "3", "-o", path(&frame)]).status.success());
        let first = polygap(&["map", path(&frame)]);
        assert!(first.status.success());
        std::fs::write(&poly, &first.stdout).unwrap();
        let doc = json(&first);
        assert_eq!(doc["dim"], if field == "real" { 2 } else { 3 });
        assert!(polygap(&["invert", path(&poly), "-o", path(&back)]).status.success());
        let second = json(&polygap(&["map", path(&back)]));
        for (x, y) in edges(&doc).iter().zip(edges(&second)) {
            assert!((x - y).abs() <= 1e-12);
        }
    }
}

#[test]
fn invalid_inputs_exit_three() {
    let dir = tempfile::tempdir().unwrap();
    let open = dir.path().join("open.json");
    std::fs::write(&open, r#"{"dim": 2, "edges": [[1, 0], [0, 1]], "perimeter": 2}"#).unwrap();
    let out = polygap(&["invert", path(&open)]);
    assert_eq!(out.status.code(), Some(3));
    assert!(String::from_utf8_lossy(&out.stderr).contains("does not close"));

    let long = dir.path().join("long.json");
    std::fs::write(&long, r#"{"dim": 2, "edges": [[2, 0], [-2, 0]], "perimeter": 4}"#).unwrap();
    assert_eq!(polygap(&["invert", path(&long)]).status.code(), Some(3));

    let skew = dir.path().join("skew.json");
    std::fs::write(&skew, r#"{"field": "real", "n": 3, "rows": [[1, 0], [0, 1], [1, 1]]}"#).unwrap();
    assert_eq!(polygap(&["map", path(&skew)]).status.code(), Some(3));

    let junk = dir.path().join("junk.json");
    std::fs::write(&junk, "{").unwrap();
    assert_eq!(polygap(&["map", path(&junk)]).status.code(), Some(2));
}

#[test]
fn verify_counterexample_default_and_phased() {
    for args in [vec!["verify-counterexample"], vec!["verify-counterexample", "--seed", "17"]] {
        let out = polygap(&args);
        assert!(out.status.success());
        let doc = json(&out);
        assert_eq!(doc["status"], "ok");
        for c in doc["checks"].as_array().unwrap() {
            assert_eq!(c["pass"], true);
            assert!(c["residual"].as_f64().unwrap() <= 1e-10);
        }
    }
}

#[test]
fn verify_equality_cases() {
    let doc = json(&polygap(&["verify-equality", "--n", "3"]));
    assert_eq!(doc["status"], "ok");
    let out = polygap(&["verify-equality", "--n", "6"]);
    assert!(out.status.success());
    assert_eq!(json(&out)["payload"]["partitions"].as_array().unwrap().len(), 3);
    let one = polygap(&["verify-equality", "--n", "6", "--p", "1", "--q", "2", "--r", "3"]);
    assert!(one.status.success());
    assert_eq!(polygap(&["verify-equality", "--n", "6", "--p", "0", "--q", "3", "--r", "3"]).status.code(), Some(2));
    assert_eq!(polygap(&["verify-equality", "--n", "6", "--p", "2"]).status.code(), Some(2));
}

#[test]
fn reproduce_plot_small_ranges() {
    let out = polygap(&["reproduce-plot", "--n-min", "4", "--n-max", "4"]);
    assert!(out.status.success());
    let mut reader = csv::Reader::from_reader(out.stdout.as_slice());
    let headers = reader.headers().unwrap().clone();
    assert_eq!(
        headers.iter().collect::<Vec<_>>(),
        ["n", "space", "best_value", "n_times_value", "multiplicities", "restarts_converged", "tetrahedral_check"]
    );
    let row = reader.records().next().unwrap().unwrap();
    assert_eq!(&row[4], "1,1,1,1");
    assert_eq!(&row[6], "pass");

    let dir = tempfile::tempdir().unwrap();
    let file = dir.path().join("plot.csv");
    let out = polygap(&[
        "reproduce-plot",
        "--n-min",
        "4",
        "--n-max",
        "8",
        "--restarts",
        "8",
        "--seed",
        "2",
        "-o",
        path(&file),
    ]);
    assert!(out.status.success());
    let mut reader = csv::Reader::from_path(&file).unwrap();
    let mut rows = 0;
    for rec in reader.records() {
        let rec = rec.unwrap();
        let v: f64 = rec[3].parse().unwrap();
        assert!(v >= 0.845299462 - 1e-6);
        rows += 1;
    }
    assert_eq!(rows, 5);
}

#[test]
fn sweep_and_optimize() {
    let out = polygap(&["sweep", "--n-min", "3", "--n-max", "5", "--space", "planar", "--restarts", "4"]);
    assert!(out.status.success());
    let text = String::from_utf8(out.stdout).unwrap();
    assert_eq!(text.lines().next().unwrap(), "n,space,best_value,n_times_value,multiplicities,restarts_converged");
    assert_eq!(text.lines().count(), 4);

    let out = polygap(&["optimize", "--n", "4", "--space", "spatial", "--restarts", "4"]);
    assert!(out.status.success());
    let doc = json(&out);
    assert_eq!(doc["certificate"]["dim"], 3);
    assert!((doc["n_times_value"].as_f64().unwrap() - 0.845299462).abs() <= 2e-3);

    assert_eq!(polygap(&["optimize", "--n", "2"]).status.code(), Some(2));
    assert_eq!(polygap(&["sweep", "--n-min", "6", "--n-max", "5"]).status.code(), Some(2));
}

#[test]
fn hypothesis_test_real_and_complex() {
    let out = polygap(&["hypothesis-test", "--n", "5", "--samples", "10000", "--field", "real", "--seed", "1"]);
    assert!(out.status.success());
    let doc = json(&out);
    assert_eq!(doc["status"], "ok");
    assert_eq!(doc["payload"]["below_bound"], 0);
    assert!(doc["payload"]["min_sigma_min"].as_f64().unwrap() >= 1.0 / 5f64.sqrt() - 1e-9);

    let out = polygap(&["hypothesis-test", "--n", "4", "--samples", "2000", "--field", "complex"]);
    assert!(out.status.success());
    let doc = json(&out);
    assert_eq!(doc["status"], "ok");
    let min = doc["payload"]["min_sigma_min"].as_f64().unwrap();
    assert!((0.4597..0.6).contains(&min));

    assert_eq!(polygap(&["hypothesis-test", "--n", "5", "--samples", "0"]).status.code(), Some(2));
}

#[test]
fn thread_cap_keeps_results() {
    let a = Command::new(env!("CARGO_BIN_EXE_polygap"))
        .args(["optimize", "--n", "5", "--restarts", "4"])
        .env("POLYGAP_THREADS", "1")
        .output()
        .unwrap();
    let b = Command::new(env!("CARGO_BIN_EXE_polygap"))
        .args(["optimize", "--n", "5", "--restarts", "4"])
        .env("POLYGAP_THREADS", "0")
        .output()
        .unwrap();
    assert!(a.status.success() && b.status.success());
    assert_eq!(a.stdout, b.stdout);
}

#[test]
fn unknown_flags_are_argument_errors() {
    assert_eq!(polygap(&["gen", "--dimension", "3"]).status.code(), Some(2));
    assert_eq!(polygap(&["gen", "--n", "3", "--field", "quaternion"]).status.code(), Some(2));
}
