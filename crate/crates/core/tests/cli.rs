use std::path::Path;
use std::process::{Command, Output};

use tempfile::TempDir;

fn adcell(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_adcell"))
        .args(args)
        .output()
        .expect("binary runs")
}

fn stdout(out: &Output) -> String {
    String::from_utf8(out.stdout.clone()).expect("utf-8 output")
}

fn path_str(p: &Path) -> &str {
    p.to_str().expect("utf-8 path")
}

fn gen(dir: &TempDir, name: &str, args: &[&str]) -> String {
    let path = dir.path().join(name);
    let mut full = vec!["gen"];
    full.extend_from_slice(args);
    full.extend_from_slice(&["-o", path_str(&path)]);
    let out = adcell(&full);
    assert_eq!(
        out.status.code(),
        Some(0),
        "gen failed: {}",
        String::from_utf8_lossy(&out.stderr)
    );
    path_str(&path).to_string()
}

#[test]
fn gap_instance_has_unit_budget_program_value() {
    let dir = TempDir::new().unwrap();
    let inst = gen(&dir, "gap.json", &["integrality-gap", "--n", "4"]);
    let out = adcell(&["lp", "-i", &inst, "--variant", "b", "--mode", "expectation"]);
    assert_eq!(out.status.code(), Some(0));
    let v: serde_json::Value = serde_json::from_str(&stdout(&out)).unwrap();
    assert_eq!(v["status"], "optimal");
    assert_eq!(v["objective"], "1");
}

#[test]
fn half_tight_online_value() {
    let dir = TempDir::new().unwrap();
    let inst = gen(&dir, "ht.json", &["half-tight", "--eps", "1/10"]);
    let out = adcell(&["oracle", "-i", &inst, "--which", "online"]);
    assert_eq!(out.status.code(), Some(0));
    assert_eq!(stdout(&out).trim(), "99/100");
}

#[test]
fn verify_passes_on_a_generated_instance() {
    let dir = TempDir::new().unwrap();
    let inst = gen(
        &dir,
        "r.json",
        &[
            "random",
            "--m",
            "3",
            "--n",
            "6",
            "--s",
            "2",
            "--bid-scale",
            "5",
            "--budget-scale",
            "8",
            "--seed",
            "7",
        ],
    );
    let out = adcell(&["verify", "-i", &inst, "--seed", "7"]);
    let text = stdout(&out);
    assert_eq!(out.status.code(), Some(0), "{text}");
    assert!(!text.contains("FAIL"));
    assert!(text.lines().all(|l| l.starts_with("ok")));
}

#[test]
fn rounding_writes_a_trace_and_reports_revenue() {
    let dir = TempDir::new().unwrap();
    let inst = gen(
        &dir,
        "r.json",
        &[
            "random",
            "--m",
            "3",
            "--n",
            "8",
            "--s",
            "2",
            "--bid-scale",
            "5",
            "--budget-scale",
            "6",
            "--seed",
            "3",
        ],
    );
    let scenario = gen(&dir, "s.json", &["scenario", "-i", &inst, "--seed", "1"]);
    let trace = dir.path().join("t.jsonl");
    let out = adcell(&[
        "solve-offline",
        "-i",
        &inst,
        "--scenario",
        &scenario,
        "--seed",
        "5",
        "--trace",
        path_str(&trace),
    ]);
    assert_eq!(
        out.status.code(),
        Some(0),
        "{}",
        String::from_utf8_lossy(&out.stderr)
    );
    let v: serde_json::Value = serde_json::from_str(&stdout(&out)).unwrap();
    let steps = v["steps"].as_u64().unwrap();
    let text = std::fs::read_to_string(&trace).unwrap();
    assert_eq!(text.lines().count() as u64, steps);
    for line in text.lines() {
        let step: serde_json::Value = serde_json::from_str(line).unwrap();
        assert!(step["case"].is_string());
    }
    assert!(v["revenue"].is_string());
}

#[test]
fn commands_are_deterministic() {
    let dir = TempDir::new().unwrap();
    let inst = gen(
        &dir,
        "r.json",
        &[
            "random",
            "--m",
            "2",
            "--n",
            "5",
            "--s",
            "2",
            "--bid-scale",
            "4",
            "--budget-scale",
            "6",
            "--seed",
            "11",
        ],
    );
    let run = |jobs: &str| {
        stdout(&adcell(&[
            "simulate",
            "-i",
            &inst,
            "--policy",
            "offline-round",
            "--trials",
            "200",
            "--seed",
            "9",
            "--jobs",
            jobs,
        ]))
    };
    let one = run("1");
    assert_eq!(one, run("1"));
    assert_eq!(one, run("2"));
    let v: serde_json::Value = serde_json::from_str(&one).unwrap();
    assert_eq!(v["violations"], 0);
    assert_eq!(v["trials"], 200);
}

#[test]
fn simulate_csv_has_a_header_and_one_row() {
    let dir = TempDir::new().unwrap();
    let inst = gen(&dir, "gap.json", &["integrality-gap", "--n", "3"]);
    let out = adcell(&[
        "simulate", "-i", &inst, "--policy", "ipb", "--trials", "100", "--seed", "1", "--csv",
    ]);
    assert_eq!(out.status.code(), Some(0));
    let text = stdout(&out);
    let lines: Vec<_> = text.lines().collect();
    assert_eq!(lines.len(), 2);
    assert_eq!(lines[0].split(',').count(), lines[1].split(',').count());
    assert!(lines[1].starts_with("ipb,100,1,"));
}

#[test]
fn invalid_input_exits_with_one() {
    let dir = TempDir::new().unwrap();
    let missing = dir.path().join("missing.json");
    assert_eq!(
        adcell(&["oracle", "-i", path_str(&missing), "--which", "online"])
            .status
            .code(),
        Some(1)
    );

    let bad = dir.path().join("bad.json");
    std::fs::write(&bad, "{ not json").unwrap();
    assert_eq!(
        adcell(&["oracle", "-i", path_str(&bad), "--which", "online"])
            .status
            .code(),
        Some(1)
    );

    assert_eq!(adcell(&["frobnicate"]).status.code(), Some(1));
    assert_eq!(
        adcell(&["simulate", "--policy", "ipb"]).status.code(),
        Some(1)
    );

    let inst = gen(&dir, "gap.json", &["integrality-gap", "--n", "2"]);
    let out = adcell(&["lp", "-i", &inst, "--variant", "b", "--mode", "realized"]);
    assert_eq!(out.status.code(), Some(1));
    let out = adcell(&[
        "simulate", "-i", &inst, "--policy", "ipb", "--trials", "10", "--seed", "1",
    ]);
    assert_eq!(
        out.status.code(),
        Some(1),
        "fewer than the minimum trials is rejected"
    );
}

#[test]
fn oversized_enumeration_exits_with_two() {
    let dir = TempDir::new().unwrap();
    let inst = gen(
        &dir,
        "big.json",
        &[
            "random",
            "--m",
            "2",
            "--n",
            "60",
            "--s",
            "3",
            "--bid-scale",
            "5",
            "--budget-scale",
            "8",
            "--seed",
            "1",
        ],
    );
    let out = adcell(&["oracle", "-i", &inst, "--which", "expected-offline"]);
    assert_eq!(
        out.status.code(),
        Some(2),
        "{}",
        String::from_utf8_lossy(&out.stderr)
    );
}

#[test]
fn help_exits_cleanly() {
    let out = adcell(&["--help"]);
    assert_eq!(out.status.code(), Some(0));
    assert!(stdout(&out).contains("simulate"));
}
