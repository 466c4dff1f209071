use std::process::{Command, Output};

use serde_json::Value;

fn run(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_fastqaoa")).args(args).output().unwrap()
}

fn json(args: &[&str]) -> Value {
    let out = run(args);
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    serde_json::from_slice(&out.stdout).unwrap()
}

fn strip_timing(mut v: Value) -> Value {
    if let Value::Object(map) = &mut v {
        map.retain(|k, _| !k.starts_with("wall_time"));
    }
    v
}

#[test]
fn simulate_p0_gives_uniform_mean() {
    let v = json(&["simulate", "--problem", "maxcut-triangle", "--p", "0"]);
    assert!((v["expectation"].as_f64().unwrap() + 1.5).abs() < 1e-12);
    for key in ["n", "p", "mixer", "expectation", "overlap", "min_cost", "wall_time_precompute_s", "wall_time_per_layer_s"] {
        assert!(v.get(key).is_some(), "missing {key}");
    }
    let v = json(&["simulate", "--problem", "labs", "--n", "3", "--p", "0"]);
    assert!(v["expectation"].as_f64().unwrap().abs() < 1e-12);
}

#[test]
fn malformed_terms_file_is_input_error() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("bad.json");
    std::fs::write(&path, "{\"n\": 3, \"terms\": [[0.5, [0, 7]]]}").unwrap();
    let out = run(&["simulate", "--terms-file", path.to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(2));
    assert!(out.stdout.is_empty());

    std::fs::write(&path, "not json").unwrap();
    let out = run(&["simulate", "--terms-file", path.to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(2));
    assert!(out.stdout.is_empty());
}

#[test]
fn terms_and_graph_files() {
    let dir = tempfile::tempdir().unwrap();
    let terms = dir.path().join("t.json");
    std::fs::write(&terms, "{\"n\": 3, \"terms\": [[0.5, [0, 1]], [0.5, [1, 2]], [0.5, [0, 2]], [-1.5, []]]}").unwrap();
    let a = json(&["simulate", "--terms-file", terms.to_str().unwrap(), "--p", "1", "--gamma", "0.4", "--beta", "0.3"]);
    let graph = dir.path().join("g.txt");
    std::fs::write(&graph, "# triangle\n0 1\n1 2\n0 2 1.0\n").unwrap();
    let b = json(&["simulate", "--problem", "maxcut", "--graph-file", graph.to_str().unwrap(), "--p", "1", "--gamma", "0.4", "--beta", "0.3"]);
    assert!((a["expectation"].as_f64().unwrap() - b["expectation"].as_f64().unwrap()).abs() < 1e-12);
}

#[test]
fn resource_error_exit_code() {
    let out = run(&["simulate", "--problem", "labs", "--n", "60", "--p", "0"]);
    assert_eq!(out.status.code(), Some(3));
    assert!(out.stdout.is_empty());
}

#[test]
fn optimize_budget_and_improvement() {
    let v = json(&["optimize", "--problem", "maxcut-triangle", "--p", "1", "--budget", "1"]);
    assert_eq!(v["evaluations"].as_u64().unwrap(), 1);
    assert_eq!(v["best_params"], v["initial_params"]);

    let v = json(&["optimize", "--problem", "maxcut-triangle", "--p", "1", "--budget", "300", "--seed", "3"]);
    assert!(v["best_value"].as_f64().unwrap() < -1.5);
    assert!(v["evaluations"].as_u64().unwrap() <= 300);
    assert_eq!(v["precompute_count"].as_u64().unwrap(), 1);
}

#[test]
fn same_seed_same_report() {
    let args = ["optimize", "--problem", "labs", "--n", "6", "--p", "2", "--budget", "40", "--seed", "11"];
    assert_eq!(strip_timing(json(&args)), strip_timing(json(&args)));
    let args = ["simulate", "--problem", "maxcut-ring", "--n", "6", "--p", "3", "--seed", "5"];
    assert_eq!(strip_timing(json(&args)), strip_timing(json(&args)));
}

#[test]
fn workers_do_not_change_physics() {
    for mixer in ["x", "xy-ring"] {
        let base = ["simulate", "--problem", "maxcut-3regular", "--n", "8", "--p", "2", "--seed", "2", "--mixer", mixer];
        let one = json(&base);
        let mut four = base.to_vec();
        four.extend(["--workers", "4"]);
        let four = json(&four);
        for key in ["expectation", "overlap"] {
            assert!((one[key].as_f64().unwrap() - four[key].as_f64().unwrap()).abs() < 1e-11);
        }
    }
    let out = run(&["simulate", "--problem", "labs", "--n", "4", "--workers", "8"]);
    assert_eq!(out.status.code(), Some(2));
}

#[test]
fn bench_rows_and_output_file() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("bench.csv");
    let out = run(&["bench", "--problem", "labs", "--n", "8", "--p", "1,2,4", "--format", "csv", "--output", path.to_str().unwrap()]);
    assert!(out.status.success());
    assert!(out.stdout.is_empty());
    let text = std::fs::read_to_string(&path).unwrap();
    assert_eq!(text.lines().count(), 4);
    assert!(text.starts_with("p,precompute_s,simulate_s,total_s,per_layer_s"));

    let v = json(&["bench", "--problem", "labs", "--n", "8", "--p", "1,2"]);
    assert_eq!(v["rows"].as_array().unwrap().len(), 2);
    assert_eq!(v["precompute_count"].as_u64().unwrap(), 1);
}

#[test]
fn precompute_report() {
    let v = json(&["precompute", "--problem", "labs", "--n", "5"]);
    assert_eq!(v["min_cost"].as_f64().unwrap(), -4.0);
    assert!(v["compact_u16"].as_bool().unwrap());
}

#[test]
fn bad_flags_are_input_errors() {
    assert_eq!(run(&["simulate"]).status.code(), Some(2));
    assert_eq!(run(&["simulate", "--problem", "labs"]).status.code(), Some(2));
    assert_eq!(run(&["simulate", "--problem", "labs", "--n", "4", "--mixer", "zz"]).status.code(), Some(2));
    assert_eq!(run(&["frobnicate"]).status.code(), Some(2));
}
