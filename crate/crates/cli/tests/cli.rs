use std::path::Path;
use std::process::{Command, Output};

use serde_json::Value;

fn krpack(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_krpack"))
        .args(args)
        .output()
        .expect("binary runs")
}

fn json(out: &Output) -> Value {
    assert!(out.status.success(), "stderr: {}", String::from_utf8_lossy(&out.stderr));
    serde_json::from_slice(&out.stdout).expect("stdout is JSON")
}

fn construct(dir: &Path, name: &str, args: &[&str], labelled: bool) -> (String, String) {
    let g = dir.join(format!("{name}.txt")).display().to_string();
    let c = dir.join(format!("{name}.json")).display().to_string();
    let mut full = vec!["construct"];
    full.extend_from_slice(args);
    full.extend_from_slice(&["--out", &g]);
    if labelled {
        full.extend_from_slice(&["--classes", &c]);
    }
    let out = krpack(&full);
    assert!(out.status.success(), "stderr: {}", String::from_utf8_lossy(&out.stderr));
    (g, c)
}

#[test]
fn invariants_of_k4_minus() {
    let dir = tempfile::tempdir().unwrap();
    let (p, _) = construct(dir.path(), "k4m", &["krminus", "--r", "4"], false);
    let v = json(&krpack(&["invariants", &p]));
    assert_eq!(v["chi"], 3);
    assert_eq!(v["sigma"], 1);
    assert_eq!(v["chi_cr"], "8/3");
    assert_eq!(v["threshold_coefficient"], "5/8");
    assert_eq!(v["hcf_is_one"], true);
}

#[test]
fn pack_extremal_is_absent_and_max_is_one() {
    let dir = tempfile::tempdir().unwrap();
    let (p, _) = construct(dir.path(), "k4m", &["krminus", "--r", "4"], false);
    let (g, _) = construct(dir.path(), "ext", &["prop3", "--r", "4", "--k", "2"], false);
    let v = json(&krpack(&["pack", "--pattern", &p, "--host", &g]));
    assert_eq!(v["decision"], "absent");
    assert!(v["packing"].is_null());
    let v = json(&krpack(&["pack", "--pattern", &p, "--host", &g, "--max"]));
    assert_eq!(v["size"], 1);
}

#[test]
fn pipeline_and_tidy_on_canonical_graph() {
    let dir = tempfile::tempdir().unwrap();
    let (g, c) = construct(dir.path(), "k116", &["canonical", "--r", "4", "--q", "1", "--n", "16"], true);
    let trace = dir.path().join("trace.json");
    let v = json(&krpack(&[
        "pipeline",
        "--host",
        &g,
        "--r",
        "4",
        "--trace",
        trace.to_str().unwrap(),
    ]));
    assert_eq!(v["decision"], "packed");
    assert_eq!(v["path"], "pipeline");
    assert_eq!(v["packing"].as_array().unwrap().len(), 4);
    let t: Value = serde_json::from_str(&std::fs::read_to_string(&trace).unwrap()).unwrap();
    assert_eq!(t, v["stage_trace"]);

    let classes: Value = serde_json::from_str(&std::fs::read_to_string(&c).unwrap()).unwrap();
    let sparse = dir.path().join("sparse.json");
    std::fs::write(&sparse, serde_json::json!({ "classes": [classes["classes"][0]] }).to_string()).unwrap();
    let v = json(&krpack(&[
        "tidy",
        "--host",
        &g,
        "--sparse",
        sparse.to_str().unwrap(),
        "--r",
        "4",
        "--tau",
        "1/100",
    ]));
    assert_eq!(v["n_star"], 16);
    assert_eq!(v["removed"].as_array().unwrap().len(), 0);
}

#[test]
fn pipeline_with_custom_ladder() {
    let dir = tempfile::tempdir().unwrap();
    let (g, _) = construct(dir.path(), "k216", &["canonical", "--r", "4", "--q", "2", "--n", "16"], true);
    let ladder = dir.path().join("ladder.json");
    std::fs::write(&ladder, r#"["1/1000", "1/500", "1/100"]"#).unwrap();
    let v = json(&krpack(&["pipeline", "--host", &g, "--r", "4", "--ladder", ladder.to_str().unwrap()]));
    assert_eq!(v["decision"], "packed");
    std::fs::write(&ladder, r#"["1/10", "1/500", "1/100"]"#).unwrap();
    let out = krpack(&["pipeline", "--host", &g, "--r", "4", "--ladder", ladder.to_str().unwrap()]);
    assert!(!out.status.success());
}

#[test]
fn hallpack_reports_packing_and_witness() {
    let dir = tempfile::tempdir().unwrap();
    let (g, c) = construct(dir.path(), "hqr", &["hqr", "--q", "1", "--r", "3"], true);
    let v = json(&krpack(&["hallpack", "--host", &g, "--classes", &c, "--q", "1", "--r", "3"]));
    assert_eq!(v["status"], "packed");
    // Two isolated vertices cannot host a star.
    let empty = dir.path().join("empty.txt");
    std::fs::write(&empty, "4 0\n").unwrap();
    let classes = dir.path().join("c.json");
    std::fs::write(&classes, r#"{"classes": [[0, 1, 2], [3]]}"#).unwrap();
    let v = json(&krpack(&[
        "hallpack",
        "--host",
        empty.to_str().unwrap(),
        "--classes",
        classes.to_str().unwrap(),
        "--q",
        "1",
        "--r",
        "3",
        "--tau",
        "1/2",
    ]));
    assert_eq!(v["status"], "absent");
}

#[test]
fn threshold_table_rows() {
    let v = json(&krpack(&["threshold-table", "--r", "5", "--n-max", "10"]));
    assert_eq!(v, serde_json::json!([{"n": 5, "min_degree": 4}, {"n": 10, "min_degree": 8}]));
}

#[test]
fn construct_to_stdout_and_bad_input() {
    let out = krpack(&["construct", "bottle", "--r", "4"]);
    assert!(out.status.success());
    let text = String::from_utf8(out.stdout).unwrap();
    assert!(text.starts_with("8 "));
    let dir = tempfile::tempdir().unwrap();
    let bad = dir.path().join("bad.txt");
    std::fs::write(&bad, "3 2\n0 1\n").unwrap();
    let out = krpack(&["construct", "krminus", "--r", "4", "--classes", bad.to_str().unwrap()]);
    assert!(!out.status.success());
    let out = krpack(&["invariants", bad.to_str().unwrap()]);
    assert!(!out.status.success());
    assert!(String::from_utf8_lossy(&out.stderr).contains("header announces"));
}
