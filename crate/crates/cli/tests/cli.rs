use std::process::{Command, Output};

use serde_json::Value;

fn fockcc(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_fockcc")).args(args).env_remove("FOCKCC_OUTPUT_DIR").output().unwrap()
}

fn json(args: &[&str]) -> Value {
    let mut all = args.to_vec();
    all.extend(["--format", "json"]);
    let out = fockcc(&all);
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    serde_json::from_slice(&out.stdout).unwrap()
}

fn strip_timings(v: &mut Value) {
    match v {
        Value::Object(m) => {
            m.remove("seconds");
            m.values_mut().for_each(strip_timings);
        }
        Value::Array(a) => a.iter_mut().for_each(strip_timings),
        _ => {}
    }
}

#[test]
fn analyze_flag_example() {
    let v = json(&["analyze", "--d", "2", "--n", "4", "--sigma", "1,0;1,1;0,1"]);
    assert_eq!(v["dimension"], 8);
    assert_eq!(v["family"], "Flag");
    assert_eq!(v["is_linear"], false);
}

#[test]
fn census_counts() {
    let v = json(&["census", "--d", "2", "--n", "4"]);
    assert_eq!(v["level_sets"], 254);
    assert_eq!(v["linear"], 119);
}

#[test]
fn cc_solve_spinor_four() {
    let args = ["cc-solve", "--d", "2", "--n", "4", "--sigma", "2,0;1,1;0,2", "--seed", "7"];
    let mut a = json(&args);
    assert_eq!(a["report"]["ccdeg"], 13);
    assert_eq!(a["solutions"][0]["count"], 13);
    let mut b = json(&args);
    strip_timings(&mut a);
    strip_timings(&mut b);
    assert_eq!(serde_json::to_string(&a).unwrap(), serde_json::to_string(&b).unwrap());
}

#[test]
fn cc_solve_csv_has_one_row_per_solution() {
    let out = fockcc(&["cc-solve", "--d", "2", "--n", "4", "--sigma", "2,0;1,1;0,2", "--format", "csv"]);
    assert!(out.status.success());
    let text = String::from_utf8(out.stdout).unwrap();
    let mut lines = text.lines();
    assert!(lines.next().unwrap().ends_with("residual,real"));
    assert_eq!(lines.count(), 13);
}

#[test]
fn malformed_level_set_reports_position() {
    let out = fockcc(&["analyze", "--d", "2", "--n", "4", "--sigma", "1,0;x,1"]);
    assert_eq!(out.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&out.stderr).contains("parse error at 4"));
}

#[test]
fn capacity_overrun_is_explicit() {
    let out = fockcc(&["census", "--d", "4", "--n", "9"]);
    assert_eq!(out.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&out.stderr).contains("too large"));
}

#[test]
fn output_directory_from_environment() {
    let dir = std::env::temp_dir().join(format!("fockcc-cli-test-{}", std::process::id()));
    std::fs::create_dir_all(&dir).unwrap();
    let out = Command::new(env!("CARGO_BIN_EXE_fockcc"))
        .args(["master", "--d", "2", "--format", "json"])
        .env("FOCKCC_OUTPUT_DIR", &dir)
        .output()
        .unwrap();
    assert!(out.status.success());
    let v: Value = serde_json::from_str(&std::fs::read_to_string(dir.join("master.json")).unwrap()).unwrap();
    assert_eq!(v["terms"], 4);
    std::fs::remove_dir_all(&dir).unwrap();
}

#[test]
fn normal_order_text() {
    let out = fockcc(&["normal-order", "a1 a1'"]);
    assert_eq!(String::from_utf8(out.stdout).unwrap().trim(), "-a1' a1 + 1");
}
