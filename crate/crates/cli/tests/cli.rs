use std::path::Path;
use std::process::{Command, Output};

use serde_json::Value;

fn expandlab(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_expandlab"))
        .args(args)
        .env_remove("EXPANDLAB_THREADS")
        .output()
        .expect("binary runs")
}

fn json(out: &Output) -> Value {
    serde_json::from_slice(&out.stdout).expect("stdout is JSON")
}

fn write(dir: &Path, name: &str, text: &str) -> String {
    let p = dir.join(name);
    std::fs::write(&p, text).unwrap();
    p.display().to_string()
}

#[test]
fn graph_report_has_exact_values() {
    let dir = tempfile::tempdir().unwrap();
    let c4 = write(dir.path(), "c4.txt", "4 4\n1 2\n2 3\n3 4\n4 1\n");
    let out = expandlab(&["graph", &c4, "--metrics", "h,mu"]);
    assert_eq!(out.status.code(), Some(0));
    let v = json(&out);
    assert_eq!(v["h"], "1/2");
    assert_eq!(v["mu"], "1");
    assert_eq!(v["config"]["limit"], 20);
    assert!(v.get("lambda_sv").is_none());
}

#[test]
fn prop19_suite_exits_zero() {
    let out = expandlab(&["verify", "prop19"]);
    assert_eq!(out.status.code(), Some(0));
    assert_eq!(json(&out)["passed"], true);
}

#[test]
fn failing_suite_exits_one() {
    let out = expandlab(&["verify", "kn", "--budget", "500"]);
    assert_eq!(out.status.code(), Some(1));
    assert_eq!(json(&out)["passed"], false);
}

#[test]
fn usage_and_input_errors_exit_two() {
    let dir = tempfile::tempdir().unwrap();
    let bad = write(dir.path(), "t.json", "{not json");
    assert_eq!(expandlab(&["tuple", &bad, "--metrics", "lambda"]).status.code(), Some(2));
    assert_eq!(expandlab(&["tuple", &bad, "--frobnicate"]).status.code(), Some(2));
    assert_eq!(expandlab(&["verify", "nosuch"]).status.code(), Some(2));
    assert_eq!(expandlab(&["graph", "/nonexistent/g.txt"]).status.code(), Some(2));
    let out = expandlab(&["tuple", &bad, "--metrics", "colour"]);
    assert_eq!(out.status.code(), Some(2));
}

#[test]
fn construct_then_analyse() {
    let dir = tempfile::tempdir().unwrap();
    let haar = expandlab(&["construct", "haar", "--n", "4", "--d", "3", "--seed", "5"]);
    assert_eq!(haar.status.code(), Some(0));
    let t = write(dir.path(), "u.json", std::str::from_utf8(&haar.stdout).unwrap());

    let power = expandlab(&["construct", "power", "--input", &t, "--s", "0.01"]);
    let pv = json(&power);
    assert_eq!(pv["metadata"]["power"]["s"], 0.01);
    let tp = write(dir.path(), "us.json", std::str::from_utf8(&power.stdout).unwrap());

    let a = expandlab(&["tuple", &t, "--metrics", "lambda,hq,mu,hd", "--budget", "2000", "--seed", "3"]);
    assert_eq!(a.status.code(), Some(0));
    let av = json(&a);
    let gap = av["gap"].as_f64().unwrap();
    assert!(gap > 0.0);
    assert!(av["hq"]["lower"].as_f64().unwrap() <= av["hq"]["best"].as_f64().unwrap());
    assert!(av["hq"]["witness"]["basis"].is_array());
    assert_eq!(av["config"]["normalization_resolved"], 3);

    let b = json(&expandlab(&["tuple", &tp, "--metrics", "lambda"]));
    assert!(b["gap"].as_f64().unwrap() < gap);
}

#[test]
fn graphical_tuple_uses_degree_normalization() {
    let dir = tempfile::tempdir().unwrap();
    let c4 = write(dir.path(), "c4.txt", "4 4\n1 2\n2 3\n3 4\n4 1\n");
    let out = expandlab(&["construct", "graphical", "--graph", &c4, "--field", "2", "--unnormalized"]);
    assert_eq!(out.status.code(), Some(0));
    let t = write(dir.path(), "b.json", std::str::from_utf8(&out.stdout).unwrap());
    let v = json(&expandlab(&["tuple", &t, "--metrics", "mu,hd"]));
    assert_eq!(v["config"]["normalization_resolved"], 2);
    assert_eq!(v["mu"]["value"], "1");
    assert_eq!(v["hd"]["value"], "1/2");
    let v = json(&expandlab(&["tuple", &t, "--metrics", "hd", "--normalization", "tuple"]));
    // Eight ordered pairs, so 1/2 at degree 2 becomes 1/8.
    assert_eq!(v["hd"]["value"], "1/8");
}

#[test]
fn reports_are_byte_stable() {
    let args = ["verify", "pointwise", "--trials", "60", "--seed", "9"];
    let a = expandlab(&args);
    let b = Command::new(env!("CARGO_BIN_EXE_expandlab"))
        .args(args)
        .env("EXPANDLAB_THREADS", "1")
        .output()
        .unwrap();
    assert_eq!(a.status.code(), Some(0));
    assert_eq!(a.stdout, b.stdout);
}

#[test]
fn experiment_writes_csv() {
    let dir = tempfile::tempdir().unwrap();
    let csv = dir.path().join("sep.csv");
    let out = expandlab(&[
        "experiment", "separation", "--n", "4", "--d", "2", "--s", "1,0.1", "--budget", "200",
        "--csv", csv.to_str().unwrap(),
    ]);
    assert_eq!(out.status.code(), Some(0), "{}", String::from_utf8_lossy(&out.stderr));
    let text = std::fs::read_to_string(&csv).unwrap();
    assert_eq!(text.lines().count(), 3);
    assert!(text.starts_with("s,gap,"));
}

#[test]
fn help_documents_file_formats() {
    let out = expandlab(&["--help"]);
    assert_eq!(out.status.code(), Some(0));
    let text = String::from_utf8(out.stdout).unwrap();
    assert!(text.contains("Graph file"));
    assert!(text.contains("\"matrices\""));
    assert!(text.contains("EXPANDLAB_THREADS"));
}
