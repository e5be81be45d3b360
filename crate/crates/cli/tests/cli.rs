use std::path::Path;
use std::process::{Command, Output};

use serde_json::Value;

fn burstecc(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_burstecc"))
        .args(args)
        .env_remove("BURST_ECC_BUDGET_BITS")
        .output()
        .expect("binary runs")
}

fn stdout(o: &Output) -> String {
    String::from_utf8(o.stdout.clone()).unwrap()
}

fn json(o: &Output) -> Value {
    serde_json::from_slice(&o.stdout).unwrap_or_else(|e| panic!("{e}: {}", stdout(o)))
}

fn path(p: &Path) -> &str {
    p.to_str().unwrap()
}

#[test]
fn ball_of_zero_word_has_closed_form_size() {
    let o = burstecc(&["ball", "--n", "8", "--m", "2", "--t1", "2", "--t2", "1", "--x", "00000000"]);
    assert_eq!(o.status.code(), Some(0));
    let text = stdout(&o);
    let body: Vec<&str> = text.lines().filter(|l| !l.starts_with('#')).collect();
    assert_eq!(body.len(), 16);
    let mut sorted = body.clone();
    sorted.sort_unstable();
    assert_eq!(sorted, body);
    assert!(body.iter().all(|l| l.len() == 6));
}

#[test]
fn ball_usage_errors() {
    let o = burstecc(&["ball", "--n", "8", "--t1", "2", "--t2", "1"]);
    assert_eq!(o.status.code(), Some(1));
    let o = burstecc(&["ball", "--t1", "2", "--t2", "1", "--x", "0102"]);
    assert_eq!(o.status.code(), Some(1));
    let o = burstecc(&["ball", "--n", "8", "--t1", "2", "--t2", "1", "--model", "ds", "--variant", "strict", "--x", "00000000"]);
    assert_eq!(o.status.code(), Some(0));
}

#[test]
fn verify_reports() {
    let o = burstecc(&["verify", "--theorem", "1", "--n", "8", "--t1", "2", "--t2", "1"]);
    assert_eq!(o.status.code(), Some(0));
    assert_eq!(json(&o)["passed"], Value::Bool(true));

    let o = burstecc(&["verify", "--theorem", "eq7", "--n", "12", "--t1", "3", "--t2", "2"]);
    assert_eq!(o.status.code(), Some(0));
    assert_eq!(json(&o)["report"]["expected"], "116");

    let o = burstecc(&["verify", "--theorem", "lemma4", "--n", "8", "--t1", "3", "--t2", "3"]);
    assert_eq!(o.status.code(), Some(0));
}

#[test]
fn verify_counterexample_exit_code() {
    // containment in the first row fails once t2 > 1
    let o = burstecc(&["verify", "--theorem", "obs2", "--n", "12", "--t1", "4", "--t2", "2"]);
    assert_eq!(o.status.code(), Some(2));
    let r = json(&o);
    assert_eq!(r["passed"], Value::Bool(false));
    assert_eq!(r["report"]["start_violations"], 0);
}

#[test]
fn verify_refuses_past_budget() {
    let o = burstecc(&["verify", "--theorem", "eq7", "--n", "20", "--t1", "3", "--t2", "2"]);
    assert_eq!(o.status.code(), Some(1));
    assert!(String::from_utf8_lossy(&o.stderr).contains("budget"));
}

#[test]
fn complexity_table_csv() {
    let o = burstecc(&["complexity-table"]);
    assert_eq!(o.status.code(), Some(0));
    let text = stdout(&o);
    let lines: Vec<&str> = text.lines().collect();
    assert_eq!(lines.len(), 16);
    assert!(lines[0].starts_with("row,n,t1,t2,t_prime,di"));
    let row7: Vec<&str> = lines[7].split(',').collect();
    assert_eq!(&row7[..5], &["7", "1024", "10", "6", "3"]);
    assert_eq!(row7[10], "34");
    let row12: Vec<&str> = lines[12].split(',').collect();
    assert_eq!(row12[10], "18");
    assert!(lines[13].ends_with("rs-operations"));
}

#[test]
fn bounds_are_exact_rationals() {
    let o = burstecc(&["bounds", "--n", "12", "--t1", "2", "--t2", "1"]);
    let r = json(&o);
    assert_eq!(r["lower"], "64/2475");
    assert_eq!(r["a1"], "184");
}

#[test]
fn tt_build_encode_decode() {
    let dir = tempfile::tempdir().unwrap();
    let cb = dir.path().join("tt.cb");
    let o = burstecc(&["build", "tt", "--n", "16", "--t", "2", "--out", path(&cb)]);
    assert_eq!(o.status.code(), Some(0), "{}", String::from_utf8_lossy(&o.stderr));

    let o = burstecc(&["encode", "--codebook", path(&cb), "--msg", "1"]);
    let x = stdout(&o).trim().to_string();
    assert_eq!(x.len(), 16);
    let o = burstecc(&["encode", "--codebook", path(&cb), "--msg", "99"]);
    assert_eq!(o.status.code(), Some(1));

    // two (2,2) bursts on the all-ones word
    let o = burstecc(&["ball", "--m", "2", "--t1", "2", "--t2", "2", "--variant", "strict", "--x", &x]);
    let text = stdout(&o);
    let y = text.lines().nth(1).unwrap();
    let o = burstecc(&["decode", "--codebook", path(&cb), "--y", y]);
    assert_eq!(o.status.code(), Some(0));
    assert_eq!(stdout(&o).trim(), x);

    let o = burstecc(&["roundtrip", "--codebook", path(&cb), "--samples", "50", "--seed", "9"]);
    assert_eq!(o.status.code(), Some(0));
    let r = json(&o);
    assert_eq!(r["seed"], 9);
    assert_eq!(r["failures"], 0);
}

#[test]
fn general_build_and_decode() {
    let dir = tempfile::tempdir().unwrap();
    let cb = dir.path().join("g.cb");
    let o = burstecc(&["build", "general", "--n", "24", "--t1", "3", "--t2", "1", "--out", path(&cb)]);
    assert_eq!(o.status.code(), Some(0), "{}", String::from_utf8_lossy(&o.stderr));
    let side: Value =
        serde_json::from_str(&std::fs::read_to_string(dir.path().join("g.cb.side.json")).unwrap()).unwrap();
    assert!(side["n1"].is_string());
    assert_eq!(side["t_prime"], "2");

    let o = burstecc(&["roundtrip", "--codebook", path(&cb), "--samples", "40", "--seed", "2"]);
    assert_eq!(o.status.code(), Some(0), "{}", stdout(&o));

    // a word far from the code
    let o = burstecc(&["decode", "--codebook", path(&cb), "--y", "111111111111111111111111"]);
    assert_eq!(o.status.code(), Some(3));
    assert_eq!(json(&o)["error"], "undecodable");
}

#[test]
fn commands_are_deterministic() {
    let a = burstecc(&["complexity-table"]);
    let b = burstecc(&["complexity-table"]);
    assert_eq!(a.stdout, b.stdout);
    let a = burstecc(&["ball", "--t1", "3", "--t2", "1", "--x", "0110100110"]);
    let b = burstecc(&["ball", "--t1", "3", "--t2", "1", "--x", "0110100110"]);
    assert_eq!(a.stdout, b.stdout);
}
