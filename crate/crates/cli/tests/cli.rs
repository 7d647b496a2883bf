//! End-to-end checks of the command-line surface: flags, formats, exit
//! codes and file outputs.

use std::process::{Command, Output};

fn mtasep(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_mtasep"))
        .args(args)
        .output()
        .expect("binary runs")
}

fn stdout(out: &Output) -> String {
    String::from_utf8_lossy(&out.stdout).into_owned()
}

#[test]
fn verify_two_point_reproduces_scaled_matrix() {
    let out = mtasep(&["verify", "two-point", "--n", "5"]);
    assert!(out.status.success());
    let text = stdout(&out);
    assert!(text.contains("0\t4\t2\t2\t2"), "{text}");
    assert!(text.contains("1\t0\t5\t2\t2"), "{text}");
    assert!(text.contains("4\t3\t2\t1\t0"), "{text}");
}

#[test]
fn verify_json_format_lists_instances() {
    let out = mtasep(&["verify", "two-point", "--n", "4", "--format", "json"]);
    assert!(out.status.success());
    let parsed: serde_json::Value = serde_json::from_str(&stdout(&out)).unwrap();
    let instances = parsed[0]["instances"].as_array().unwrap();
    assert_eq!(instances.len(), 12);
    assert!(instances
        .iter()
        .all(|i| i["outcome"] == "Match" && i["expected"].as_str().unwrap().contains('/')));
}

#[test]
fn verify_budget_violation_exits_two() {
    let out = mtasep(&["verify", "two-point", "--n", "6", "--budget", "10"]);
    assert_eq!(out.status.code(), Some(2));
}

#[test]
fn verify_lumping_small() {
    let out = mtasep(&["verify", "lumping", "--n", "3"]);
    assert!(out.status.success(), "{}", stdout(&out));
}

#[test]
fn verify_ssyt_small_bound() {
    let out = mtasep(&["verify", "ssyt", "--max", "4"]);
    assert!(out.status.success());
}

#[test]
fn conjecture_known_true_subcase() {
    // The spread-uniform claim at r=2 is a proved special case.
    let out = mtasep(&["conjecture", "8.2", "--n", "5"]);
    assert!(out.status.success(), "{}", stdout(&out));
    let text = stdout(&out);
    assert!(text.contains("1/25"), "{text}");
}

#[test]
fn conjecture_accepts_descriptive_names() {
    let out = mtasep(&[
        "conjecture",
        "block-independence",
        "--n",
        "4",
        "--max-two-blocks",
        "2",
    ]);
    assert!(out.status.success());
}

#[test]
fn conjecture_rejects_unknown_id() {
    let out = mtasep(&["conjecture", "9.1", "--n", "5"]);
    assert_eq!(out.status.code(), Some(3));
}

#[test]
fn simulate_is_deterministic_per_seed() {
    let args = [
        "simulate",
        "--distinct",
        "3",
        "--horizon",
        "50",
        "--seed",
        "9",
        "--pattern",
        "1=1,2=2",
        "--format",
        "json",
    ];
    let a = mtasep(&args);
    let b = mtasep(&args);
    assert!(a.status.success());
    assert_eq!(stdout(&a), stdout(&b));
    let parsed: serde_json::Value = serde_json::from_str(&stdout(&a)).unwrap();
    assert_eq!(parsed["seed"], 9);
    assert!(parsed["patterns"][0]["estimate"].is_f64());
}

#[test]
fn simulate_rejects_bad_pattern() {
    let out = mtasep(&[
        "simulate",
        "--distinct",
        "3",
        "--horizon",
        "10",
        "--seed",
        "1",
        "--pattern",
        "oops",
    ]);
    assert_eq!(out.status.code(), Some(3));
}

#[test]
fn ncore_replay_reaches_known_partition() {
    let out = mtasep(&[
        "ncore",
        "--n",
        "4",
        "--replay",
        "0,2,3,1,2,3,0,1",
        "--format",
        "json",
    ]);
    assert!(out.status.success());
    let parsed: serde_json::Value = serde_json::from_str(&stdout(&out)).unwrap();
    assert_eq!(parsed["rows"], serde_json::json!([6, 3, 1, 1]));
}

#[test]
fn ncore_curve_emits_vertices() {
    let out = mtasep(&["ncore", "--n", "4", "--curve"]);
    assert!(out.status.success());
    let text = stdout(&out);
    assert_eq!(text.lines().count(), 5, "{text}");
    assert!(text.starts_with("x,y\n0,"), "{text}");
}

#[test]
fn ncore_growth_summary_to_file() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("growth.json");
    let out = mtasep(&[
        "ncore",
        "--n",
        "4",
        "--steps",
        "500",
        "--seeds",
        "3",
        "--out",
        path.to_str().unwrap(),
    ]);
    assert!(out.status.success());
    let parsed: serde_json::Value =
        serde_json::from_str(&std::fs::read_to_string(&path).unwrap()).unwrap();
    assert_eq!(parsed["trajectories"].as_array().unwrap().len(), 3);
    assert!(parsed["medianDistance"].as_f64().unwrap() > 0.0);
}

#[test]
fn psi_small_and_invalid() {
    let out = mtasep(&["psi", "--n", "3"]);
    assert!(out.status.success());
    let text = stdout(&out);
    assert!(text.contains("\"2\", \"0\", \"-2\""), "{text}");
    assert!(text.contains("positive ratio: true"));
    let bad = mtasep(&["psi", "--n", "1"]);
    assert_eq!(bad.status.code(), Some(3));
}

#[test]
fn unknown_flag_exits_three() {
    let out = mtasep(&["verify", "two-point", "--bogus"]);
    assert_eq!(out.status.code(), Some(3));
}
