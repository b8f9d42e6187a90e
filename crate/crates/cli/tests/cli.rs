use std::process::{Command, Output};

use serde_json::Value;

fn run(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_normcensus"))
        .args(args)
        .output()
        .expect("binary runs")
}

fn json(args: &[&str]) -> Value {
    let out = run(args);
    assert!(out.status.success(), "{args:?}: {}", String::from_utf8_lossy(&out.stderr));
    serde_json::from_slice(&out.stdout).expect("valid JSON")
}

fn code(args: &[&str]) -> i32 {
    run(args).status.code().expect("exit code")
}

#[test]
fn unit_reports() {
    let v = json(&["unit", "34"]);
    assert_eq!(v["h_plus"], 4);
    assert_eq!(v["eps"], "35+6*sqrt(34)");
    let v = json(&["unit", "2"]);
    assert_eq!(v["h_plus"], 1);
    assert_eq!(v["eps0_norm"], -1);
    assert_eq!(code(&["unit", "12"]), 2);
    assert_eq!(code(&["unit", "1"]), 2);
}

#[test]
fn solve_reports() {
    let v = json(&["solve", "34", "-2"]);
    assert_eq!(v["locally_solvable"], true);
    assert_eq!(v["c_m"], 0);
    assert_eq!(v["solvable"], false);
    assert_eq!(v["witness"], Value::Null);
    let v = json(&["solve", "34", "33"]);
    assert_eq!(v["c_m"], 8);
    assert_eq!(v["solvable"], true);
    assert_eq!(v["witness"], serde_json::json!([13, 2]));
    assert_eq!(code(&["solve", "34", "0"]), 2);
    assert_eq!(code(&["solve", "34", "abc"]), 2);
}

#[test]
fn census_rows_and_calibration() {
    let v = json(&["census", "34", "--m-range", "-50..50"]);
    let rows = v["rows"].as_array().unwrap();
    assert_eq!(rows.len(), 100);
    assert!(v["calibration"]["dispersion"].as_f64().unwrap() <= 0.01);

    let v = json(&["census", "2", "--m-range", "-10..10", "--T-exponents", "3,40"]);
    for row in v["rows"].as_array().unwrap() {
        assert_eq!(row["locally_solvable"], row["solvable"], "{row}");
        assert!(row["counts"]["3"].is_u64());
    }
    assert_eq!(code(&["census", "2", "--m-range", "0..0"]), 2);
    assert_eq!(code(&["census", "2", "--m-range", "3..1"]), 2);
    assert_eq!(code(&["census", "2", "--m-range", "1-3"]), 2);
}

#[test]
fn count_density_cna() {
    assert_eq!(json(&["count", "2", "-1", "10"])["count"], 8);
    assert_eq!(json(&["density", "34", "1", "7", "4"])["density"], "8/7");
    assert_eq!(json(&["cna", "3", "1"])["c_value"], "1/2");
    assert_eq!(json(&["cna", "6", "7"])["c_value"], "1/1");
    assert_eq!(json(&["cna", "5", "1", "--ratio", "2=-1/3"])["c_value"], "2/3");
    assert_eq!(code(&["cna", "5", "3"]), 2);
    assert_eq!(code(&["cna", "4", "-1"]), 2);
}

#[test]
fn big_counts_are_strings_past_2_53() {
    let v = json(&["count", "34", "1", "100000000000000000000"]);
    assert_eq!(v["t"], "100000000000000000000");
    assert_eq!(v["method"], "orbits");
    assert!(v["count"].is_u64());
}

#[test]
fn reports_are_identical_across_thread_counts() {
    let args = ["census", "10", "--m-range", "-40..40", "--T-exponents", "20"];
    let one = Command::new(env!("CARGO_BIN_EXE_normcensus"))
        .args(args)
        .env("NORMCENSUS_THREADS", "1")
        .output()
        .unwrap();
    let many = Command::new(env!("CARGO_BIN_EXE_normcensus"))
        .args(args)
        .env("NORMCENSUS_THREADS", "4")
        .output()
        .unwrap();
    assert!(one.status.success() && many.status.success());
    assert_eq!(one.stdout, many.stdout);
    let bad = Command::new(env!("CARGO_BIN_EXE_normcensus"))
        .args(["unit", "2"])
        .env("NORMCENSUS_THREADS", "0")
        .output()
        .unwrap();
    assert_eq!(bad.status.code(), Some(2));
}

#[test]
fn tsv_and_out_file() {
    let out = run(&["--tsv", "solve", "2", "7"]);
    let text = String::from_utf8(out.stdout).unwrap();
    let lines: Vec<&str> = text.lines().collect();
    assert_eq!(lines.len(), 2);
    assert!(lines[0].starts_with("d\tm\tlocally_solvable"));

    let path = std::env::temp_dir().join(format!("normcensus-{}.json", std::process::id()));
    let out = run(&["unit", "5", "--out", path.to_str().unwrap()]);
    assert!(out.status.success());
    assert!(out.stdout.is_empty());
    let v: Value = serde_json::from_str(&std::fs::read_to_string(&path).unwrap()).unwrap();
    assert_eq!(v["eps0"], "(1+sqrt(5))/2");
    std::fs::remove_file(path).ok();
}
