use std::path::Path;
use std::process::{Command, Output};

fn testimony(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_testimony")).args(args).output().unwrap()
}

fn code(o: &Output) -> i32 {
    o.status.code().unwrap()
}

fn write(dir: &Path, name: &str, text: &str) -> String {
    let p = dir.join(name);
    std::fs::write(&p, text).unwrap();
    p.to_str().unwrap().to_string()
}

#[test]
fn run_bundled_worked_example() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().to_str().unwrap();
    let o = testimony(&["run", "paper-section3", "--out", out]);
    assert_eq!(code(&o), 0, "{}", String::from_utf8_lossy(&o.stderr));
    let summary = std::fs::read_to_string(dir.path().join("summary.json")).unwrap();
    assert!(summary.contains("computed .714285714286"));
    let trace = std::fs::read_to_string(dir.path().join("trace.csv")).unwrap();
    for v in ["0.56", "0.714285714286", "0.776", "0.79381443299", "0.798441558442"] {
        assert!(trace.contains(&format!(",stream,T,{v}\n")), "{v}");
    }
}

#[test]
fn knowledge_first_game_exits_zero() {
    let dir = tempfile::tempdir().unwrap();
    let o = testimony(&["run", "prop9-game", "--out", dir.path().to_str().unwrap()]);
    assert_eq!(code(&o), 0);
    let summary = std::fs::read_to_string(dir.path().join("summary.json")).unwrap();
    assert!(summary.contains("\"horizon_exhausted\""), "{summary}");
}

#[test]
fn malformed_json_exits_two() {
    let dir = tempfile::tempdir().unwrap();
    let bad = write(dir.path(), "bad.json", "{\"name\": ");
    assert_eq!(code(&testimony(&["run", &bad, "--out", dir.path().to_str().unwrap()])), 2);
    assert_eq!(code(&testimony(&["validate", &bad])), 2);
}

#[test]
fn schema_violation_lists_diagnostics() {
    let dir = tempfile::tempdir().unwrap();
    let text = testimony_core::bundled::get("paper-section3").unwrap().replace("\"h1\": 0.6", "\"h1\": 0.9");
    let path = write(dir.path(), "s.json", &text);
    let o = testimony(&["validate", &path]);
    assert_eq!(code(&o), 2);
    assert!(String::from_utf8_lossy(&o.stderr).contains("sum to 1"));
}

#[test]
fn missing_file_exits_one() {
    assert_eq!(code(&testimony(&["run", "/nonexistent/scenario.json"])), 1);
}

#[test]
fn failed_assertion_exits_three() {
    let dir = tempfile::tempdir().unwrap();
    let text = testimony_core::bundled::get("paper-section3").unwrap().replace("\"value\": 0.56", "\"value\": 0.57");
    let path = write(dir.path(), "s.json", &text);
    let o = testimony(&["run", &path, "--out", dir.path().join("o").to_str().unwrap()]);
    assert_eq!(code(&o), 3);
    assert!(dir.path().join("o/report.txt").exists());
}

#[test]
fn overrides_apply() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().to_str().unwrap();
    let o = testimony(&["run", "paper-section3", "--out", out, "--horizon", "10", "--mode", "standard", "--seed", "5"]);
    assert_eq!(code(&o), 0);
    let summary: serde_json::Value = serde_json::from_str(&std::fs::read_to_string(dir.path().join("summary.json")).unwrap()).unwrap();
    assert_eq!(summary["steps"], 10);
    assert_eq!(summary["mode"], "standard");
    assert_eq!(summary["seed"], 5);
}

#[test]
fn sweep_over_prior_grid() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().to_str().unwrap();
    let o = testimony(&["sweep", "sweep-prior-template", "--grid", "sweep-prior-grid", "--out", out]);
    assert_eq!(code(&o), 0, "{}", String::from_utf8_lossy(&o.stderr));
    let csv = std::fs::read_to_string(dir.path().join("sweep.csv")).unwrap();
    let rows: Vec<&str> = csv.lines().skip(1).collect();
    assert_eq!(rows.len(), 10);
    assert!(rows[0].contains(",false,,") && rows[0].ends_with("zero prior: convergence precondition violated"));
    assert!(rows[1..].iter().all(|r| r.contains(",true,")));
}

#[test]
fn sweep_cap_and_empty_grid() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().to_str().unwrap();
    let o = testimony(&["sweep", "sweep-prior-template", "--grid", "sweep-prior-grid", "--out", out, "--cap", "3"]);
    assert_eq!(code(&o), 2);
    let empty = write(dir.path(), "grid.json", "{\"axes\": []}");
    assert_eq!(code(&testimony(&["sweep", "sweep-prior-template", "--grid", &empty, "--out", out])), 0);
    let csv = std::fs::read_to_string(dir.path().join("sweep.csv")).unwrap();
    assert_eq!(csv.lines().count(), 1);
}

#[test]
fn list_and_validate() {
    let o = testimony(&["list-scenarios"]);
    assert_eq!(code(&o), 0);
    let text = String::from_utf8_lossy(&o.stdout);
    assert!(text.contains("paper-section3.json") && text.contains("prop9-game.json"));
    assert!(!text.contains("grid"));
    assert_eq!(code(&testimony(&["validate", "discount-game"])), 0);
}

#[test]
fn repeated_runs_are_byte_identical() {
    let dir = tempfile::tempdir().unwrap();
    let a = dir.path().join("a");
    let b = dir.path().join("b");
    for out in [&a, &b] {
        assert_eq!(code(&testimony(&["run", "discount-game", "--out", out.to_str().unwrap()])), 0);
    }
    assert_eq!(std::fs::read(a.join("trace.csv")).unwrap(), std::fs::read(b.join("trace.csv")).unwrap());
}
