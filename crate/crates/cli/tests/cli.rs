use serde_json::Value;
use std::path::PathBuf;
use std::process::{Command, Output};

fn bin() -> Command {
    let mut c = Command::new(env!("CARGO_BIN_EXE_engelnq"));
    c.env_remove("ENGELNQ_THREADS");
    c
}

fn presentation(name: &str) -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("../../presentations").join(name)
}

fn scratch(dir: &tempfile::TempDir, name: &str, text: &str) -> PathBuf {
    let p = dir.path().join(name);
    std::fs::write(&p, text).unwrap();
    p
}

fn run(args: &[&str]) -> Output {
    bin().args(args).output().unwrap()
}

fn json(args: &[&str]) -> (i32, Value) {
    let mut a = vec!["--format", "json"];
    a.extend_from_slice(args);
    let out = run(&a);
    let v = serde_json::from_slice(&out.stdout).unwrap_or_else(|_| panic!("bad json: {}", String::from_utf8_lossy(&out.stderr)));
    (out.status.code().unwrap(), v)
}

#[test]
fn count_bound() {
    let (code, v) = json(&["count-bound"]);
    assert_eq!(code, 0);
    assert_eq!(v["result"]["total"], 5705);
    assert_eq!(v["status"], "ok");
    assert_eq!(v["tool"]["name"], "engelnq");
}

#[test]
fn engel_primes_smallest_case() {
    let (code, v) = json(&["engel-primes", "--case", "6,1,1"]);
    assert_eq!(code, 0);
    let primes: Vec<&str> = v["result"]["primes"].as_array().unwrap().iter().map(|p| p.as_str().unwrap()).collect();
    assert_eq!(primes, ["2", "3", "5", "7"]);
    assert_eq!(v["result"]["rank"], 6);
    assert_eq!(v["result"]["full_rank"], true);
}

#[test]
fn rank_deficient_target_is_a_property_failure() {
    // below weight 6 there are no Engel rows at all
    let (code, v) = json(&["engel-primes", "--case", "1,1"]);
    assert_eq!(code, 2);
    assert_eq!(v["status"], "property-failed");
    assert_eq!(v["result"]["full_rank"], false);
}

#[test]
fn wreath_witness_and_verify() {
    let (code, v) = json(&["wreath3", "witness", "--k", "3"]);
    assert_eq!(code, 0);
    assert_eq!(v["result"]["bracket_indices"], serde_json::json!([2, 3, 4]));
    assert_eq!(v["result"]["witness"], "[b,[a_2,a_1],[a_3,a_1],[a_4,a_1]]");
    let (code, v) = json(&["wreath3", "verify", "--max-index", "4", "--weight-cap", "5", "--random", "20"]);
    assert_eq!(code, 0);
    assert!(v["result"]["instances"].as_u64().unwrap() > 100);
    assert!(v["result"]["counterexample"].is_null());
}

#[test]
fn gfp_table_small_and_rejected() {
    let (code, v) = json(&["gfp-table", "--p", "31", "--m", "3", "--cap-x", "6"]);
    assert_eq!(code, 0);
    assert!(v["result"]["reference"].is_null());
    assert!(v["result"]["class_id_x"].as_u64().unwrap() <= 5);
    let out = run(&["gfp-table", "--p", "3", "--m", "2", "--cap-x", "4"]);
    assert_eq!(out.status.code(), Some(1));
    assert!(String::from_utf8_lossy(&out.stderr).contains("rejected"));
}

#[test]
fn build_is_deterministic_up_to_the_timestamp() {
    let dir = tempfile::tempdir().unwrap();
    let path = presentation("engel5_gf31_small.pres");
    let p = path.to_str().unwrap();
    let out1 = scratch(&dir, "r1.json", "");
    let out2 = scratch(&dir, "r2.json", "");
    let a = run(&["--format", "json", "--threads", "1", "build", p, "-o", out1.to_str().unwrap()]);
    assert_eq!(a.status.code(), Some(0));
    let b = bin()
        .env("ENGELNQ_THREADS", "2")
        .args(["--format", "json", "build", p, "--output", out2.to_str().unwrap()])
        .output()
        .unwrap();
    assert_eq!(b.status.code(), Some(0));
    let strip = |path: &PathBuf| {
        let mut v: Value = serde_json::from_str(&std::fs::read_to_string(path).unwrap()).unwrap();
        v.as_object_mut().unwrap().remove("timestamp");
        serde_json::to_string_pretty(&v).unwrap()
    };
    assert_eq!(strip(&out1), strip(&out2));
    let v: Value = serde_json::from_str(&strip(&out1)).unwrap();
    assert_eq!(v["input_sha256"].as_str().unwrap().len(), 64);
    assert!(v["result"]["dimension"].as_u64().unwrap() > 10);
}

#[test]
fn build_free_algebra_and_table() {
    let dir = tempfile::tempdir().unwrap();
    let table = scratch(&dir, "free3.table", "");
    let (code, v) = json(&["build", presentation("free3.pres").to_str().unwrap(), "--table", table.to_str().unwrap()]);
    assert_eq!(code, 0);
    assert_eq!(v["result"]["dimension"], 80);
    assert_eq!(v["result"]["dimension_by_weight"]["5"], 48);
    let text = std::fs::read_to_string(table).unwrap();
    assert!(text.starts_with("ring Q\ndimension 80\nclass 5\n"));
}

#[test]
fn malformed_presentation_reports_position() {
    let dir = tempfile::tempdir().unwrap();
    let p = scratch(&dir, "bad.pres", "ring Q\ngens x a\ncommute x  b\n");
    let out = run(&["build", p.to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(1));
    let err = String::from_utf8_lossy(&out.stderr);
    assert!(err.contains("line 3, column 12"), "{err}");
}

#[test]
fn snf_of_a_matrix_file() {
    let dir = tempfile::tempdir().unwrap();
    let m = scratch(&dir, "m.txt", "1:2 2:4\n2:6\n# comment\n\n1:4 2:14\n");
    let (code, v) = json(&["snf", m.to_str().unwrap()]);
    assert_eq!(code, 0);
    assert_eq!(v["result"]["rank"], 2);
    assert_eq!(v["result"]["divisors"], serde_json::json!(["2", "6"]));
    let bad = scratch(&dir, "bad.txt", "1:2 2:4\n2:x\n");
    let out = run(&["snf", bad.to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(1));
    assert!(String::from_utf8_lossy(&out.stderr).contains("line 2, column 1"));
}

#[test]
fn human_output_is_readable() {
    let out = run(&["count-bound", "--m", "2", "--cap-x", "2"]);
    assert_eq!(out.status.code(), Some(0));
    let text = String::from_utf8_lossy(&out.stdout);
    assert!(text.contains("total: 10"), "{text}");
    assert!(text.contains("status: ok"));
}

#[test]
fn usage_errors_exit_one() {
    assert_eq!(run(&["frobnicate"]).status.code(), Some(1));
    assert_eq!(run(&["gfp-table"]).status.code(), Some(1));
    assert_eq!(run(&["gfp-table", "--p", "13"]).status.code(), Some(1));
    assert_eq!(run(&["--help"]).status.code(), Some(0));
    let out = bin().env("ENGELNQ_THREADS", "many").arg("count-bound").output().unwrap();
    assert_eq!(out.status.code(), Some(1));
    assert_eq!(run(&["build", "/nonexistent/x.pres"]).status.code(), Some(1));
}
