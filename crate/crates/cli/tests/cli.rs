//! End-to-end tests of the `gbs` binary: exit codes, rendered output and
//! machine-readable records.

use std::fs;
use std::path::Path;
use std::process::{Command, Output};

fn gbs(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_gbs"))
        .args(args)
        .output()
        .expect("binary runs")
}

fn stdout(out: &Output) -> String {
    String::from_utf8_lossy(&out.stdout).trim().to_string()
}

fn write(dir: &Path, name: &str, content: &str) -> String {
    let path = dir.join(name);
    fs::write(&path, content).expect("fixture written");
    path.to_string_lossy().into_owned()
}

const FIG_COVER: &str = r#"{"d":2,"n_sheets":4,"perms":[[1,2,3,0],[1,0,3,2]]}"#;

#[test]
fn comm_exit_codes_and_output() {
    let out = gbs(&["comm", "2", "4", "3", "6"]);
    assert_eq!(out.status.code(), Some(0));
    assert_eq!(stdout(&out), "commensurable (CommonRatio)");

    let out = gbs(&["comm", "2", "4", "2", "8"]);
    assert_eq!(out.status.code(), Some(1));
    assert_eq!(stdout(&out), "not commensurable (RatioMismatch)");

    let out = gbs(&["comm", "0", "4", "2", "8"]);
    assert_eq!(out.status.code(), Some(2));
}

#[test]
fn comm_witness_json_round_trips() {
    let out = gbs(&["comm", "2", "6", "-2", "6", "--witness", "--json"]);
    assert_eq!(out.status.code(), Some(0));
    let v: serde_json::Value = serde_json::from_str(&stdout(&out)).expect("valid JSON");
    assert_eq!(v["commensurable"], serde_json::Value::Bool(true));
    assert_eq!(v["case"], "SignTwin");
    assert_eq!(v["witness"]["steps"].as_array().map(|s| s.len()), Some(2));
}

#[test]
fn normalize_renders_the_golden_form() {
    let dir = tempfile::tempdir().unwrap();
    let cover = write(dir.path(), "fig.json", FIG_COVER);
    let out = gbs(&["normalize", &cover, "--n", "5"]);
    assert_eq!(out.status.code(), Some(0));
    assert_eq!(stdout(&out), "NF(r=5,l=1,m=2;p=[0,0,1,1])");
}

#[test]
fn lift_validate_modular_pipeline() {
    let dir = tempfile::tempdir().unwrap();
    let cover = write(dir.path(), "fig.json", FIG_COVER);
    let out = gbs(&["lift", &cover, "--p", "1", "--q", "5"]);
    assert_eq!(out.status.code(), Some(0));
    let graph = write(dir.path(), "lifted.json", &stdout(&out));

    let out = gbs(&["validate", &graph]);
    assert_eq!(out.status.code(), Some(0));
    assert!(stdout(&out).starts_with("valid: 4 vertices, 8 edges"));

    // Index-4 subgroup of G^2_{1,5}: modular image <5^2>.
    let out = gbs(&["modular", &graph]);
    assert_eq!(stdout(&out), "gen = 25");
}

#[test]
fn modular_of_bs_loop() {
    let dir = tempfile::tempdir().unwrap();
    let graph = write(
        dir.path(),
        "bs26.json",
        r#"{"vertices":["u"],"edges":[{"id":"e","from":"u","to":"u","a":"2","omega":"6"}]}"#,
    );
    let out = gbs(&["modular", &graph]);
    assert_eq!(stdout(&out), "gen = 3");
    let out = gbs(&["modular", &graph, "--json"]);
    let v: serde_json::Value = serde_json::from_str(&stdout(&out)).unwrap();
    assert_eq!(v["generator"], "3");
}

#[test]
fn iso_of_gamma_cover_against_trivial() {
    let dir = tempfile::tempdir().unwrap();
    let out = gbs(&["gammak", "3"]);
    assert_eq!(out.status.code(), Some(0));
    let g3 = write(dir.path(), "g3.json", &stdout(&out));
    let t3 = write(
        dir.path(),
        "t3.json",
        r#"{"d":3,"n_sheets":1,"perms":[[0],[0],[0]]}"#,
    );
    let fig = write(dir.path(), "fig.json", FIG_COVER);

    let out = gbs(&["iso", &g3, &t3, "--n1", "2", "--n2", "2"]);
    assert_eq!(out.status.code(), Some(0));
    assert!(stdout(&out).starts_with("isomorphic"));

    let out = gbs(&["iso", &fig, &t3, "--n1", "2", "--n2", "2"]);
    assert_eq!(out.status.code(), Some(1));
}

#[test]
fn deform_is_deterministic_and_replayable() {
    let dir = tempfile::tempdir().unwrap();
    let graph = write(
        dir.path(),
        "nf.json",
        r#"{"vertices":["v"],"edges":[{"id":"e0","from":"v","to":"v","a":"1","omega":"9"},{"id":"e1","from":"v","to":"v","a":"3","omega":"3"}]}"#,
    );
    let run1 = gbs(&["deform", &graph, "--steps", "8", "--seed", "5", "--json"]);
    let run2 = gbs(&["deform", &graph, "--steps", "8", "--seed", "5", "--json"]);
    assert_eq!(out_json(&run1), out_json(&run2));
    let v = out_json(&run1);
    assert_eq!(v["steps_applied"], 8);
    assert_eq!(v["moves"].as_array().map(|m| m.len()), Some(8));

    // The written graph parses and stays valid.
    let out_path = dir.path().join("deformed.json");
    let run = gbs(&[
        "deform",
        &graph,
        "--steps",
        "8",
        "--seed",
        "5",
        "--out",
        out_path.to_str().unwrap(),
    ]);
    assert_eq!(run.status.code(), Some(0));
    let check = gbs(&["validate", out_path.to_str().unwrap()]);
    assert_eq!(check.status.code(), Some(0));
}

fn out_json(out: &Output) -> serde_json::Value {
    serde_json::from_str(&stdout(out)).expect("valid JSON")
}

#[test]
fn validate_reports_violations() {
    let dir = tempfile::tempdir().unwrap();
    let graph = write(
        dir.path(),
        "bad.json",
        r#"{"vertices":["u","w"],"edges":[{"id":"e","from":"u","to":"u","a":"2","omega":"0"}]}"#,
    );
    let out = gbs(&["validate", &graph]);
    assert_eq!(out.status.code(), Some(1));
    assert!(stdout(&out).contains("zero label"));

    let garbage = write(dir.path(), "garbage.json", "not json");
    let out = gbs(&["validate", &garbage]);
    assert_eq!(out.status.code(), Some(2));
}

#[test]
fn hmn_describes_the_standard_subgroup() {
    let out = gbs(&["hmn", "4", "6", "--json"]);
    let v = out_json(&out);
    assert_eq!(v["index"], 2);
    assert_eq!(v["p"], "2");
    assert_eq!(v["q"], "3");
}
