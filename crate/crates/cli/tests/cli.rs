//! Binary-level contract: exit codes, the one-line report on stderr, and
//! the thread cap from the environment.

use std::process::{Command, Output};

fn av(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_av1324")).args(args).output().expect("binary runs")
}

fn report(out: &Output) -> serde_json::Value {
    let text = String::from_utf8_lossy(&out.stderr);
    serde_json::from_str(text.lines().last().expect("nonempty stderr")).expect("JSON report")
}

#[test]
fn usage_errors_exit_two() {
    assert_eq!(av(&["nonsense"]).status.code(), Some(2));
    assert_eq!(av(&["q", "pair", "--tree", "()"]).status.code(), Some(2));
}

#[test]
fn bad_input_exits_three() {
    let out = av(&["q", "pair", "--tree", "((()", "--forest", "()"]);
    assert_eq!(out.status.code(), Some(3));
    assert!(String::from_utf8_lossy(&out.stderr).contains("parse error"));

    let out = av(&["luka", "count", "--pattern", "1,x", "--path", "1,0"]);
    assert_eq!(out.status.code(), Some(3));

    let out = av(&["bound", "eval", "--lambda", "0.6", "--delta", "0.8", "--max-n", "6"]);
    assert_eq!(out.status.code(), Some(3));
}

#[test]
fn thin_table_exits_four() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("q.csv");
    let path_str = path.to_str().unwrap();
    assert!(av(&["q", "table", "--max-n", "5", "--out", path_str]).status.success());
    let out = av(&[
        "bound", "eval", "--lambda", "0.6", "--delta", "0.8", "--max-n", "8", "--q-table",
        path_str,
    ]);
    assert_eq!(out.status.code(), Some(4));
    assert!(String::from_utf8_lossy(&out.stderr).contains("coverage"));
}

#[test]
fn every_success_emits_one_report() {
    let out = av(&["trees", "enum", "--size", "4", "--kind", "forest"]);
    assert!(out.status.success());
    assert_eq!(String::from_utf8_lossy(&out.stdout).lines().count(), 14);
    let stderr = String::from_utf8_lossy(&out.stderr);
    assert_eq!(stderr.lines().count(), 1, "exactly one report line");
    let r = report(&out);
    for field in ["command", "inputs", "outputs", "wall_ms", "threads", "version"] {
        assert!(r.get(field).is_some(), "report lacks {field}");
    }
    assert_eq!(r["command"], "trees enum");
    assert_eq!(r["outputs"]["count"], 14);
}

#[test]
fn verify_battery_reports_checks() {
    let out = av(&["verify", "embed"]);
    assert!(out.status.success());
    let r = report(&out);
    assert_eq!(r["outputs"]["failed"], 0);
    assert!(r["outputs"]["passed"].as_u64().unwrap() >= 5);
    let stdout = String::from_utf8_lossy(&out.stdout);
    assert!(stdout.lines().filter(|l| l.starts_with("PASS")).count() >= 5);
}

#[test]
fn env_var_caps_threads() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("q.csv");
    let out = Command::new(env!("CARGO_BIN_EXE_av1324"))
        .args(["q", "table", "--max-n", "5", "--out", path.to_str().unwrap(), "--threads", "8"])
        .env("AV1324_THREADS", "1")
        .output()
        .expect("binary runs");
    assert!(out.status.success());
    assert_eq!(report(&out)["threads"], 1);
}

#[test]
fn dist_command_prints_histogram_and_stats() {
    let out = av(&["luka", "dist", "--pattern", "1,0", "--len", "4"]);
    assert!(out.status.success());
    let stdout = String::from_utf8_lossy(&out.stdout);
    assert!(stdout.contains("mean = "));
    let r = report(&out);
    // Histogram masses over all length-4 paths sum to Catalan(4) = 14.
    let total: u64 = r["outputs"]["histogram"]
        .as_object()
        .unwrap()
        .values()
        .map(|v| v.as_str().unwrap().parse::<u64>().unwrap())
        .sum();
    assert_eq!(total, 14);
}
