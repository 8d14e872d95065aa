use std::path::PathBuf;
use std::process::{Command, Output};

use serde_json::Value;

fn epb(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_epb"))
        .args(args)
        .env_remove("EPB_SEED")
        .output()
        .expect("binary runs")
}

fn schema_path(name: &str) -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR"))
        .join("../../schemas")
        .join(format!("{name}.schema.json"))
}

/// Runs `args`, expects success and a document valid under `schema`.
fn json_output(schema: &str, args: &[&str]) -> Value {
    let out = epb(args);
    assert_eq!(
        out.status.code(),
        Some(0),
        "{}",
        String::from_utf8_lossy(&out.stderr)
    );
    let doc: Value = serde_json::from_slice(&out.stdout).expect("stdout is JSON");
    let schema: Value =
        serde_json::from_str(&std::fs::read_to_string(schema_path(schema)).unwrap()).unwrap();
    let validator = jsonschema::validator_for(&schema).expect("schema compiles");
    let errors: Vec<String> = validator
        .iter_errors(&doc)
        .map(|e| format!("{} at {}", e, e.instance_path))
        .collect();
    assert!(errors.is_empty(), "{schema}: {errors:?}");
    doc
}

#[test]
fn bounds_on_chsh() {
    let doc = json_output(
        "bounds",
        &[
            "bounds", "--graph", "chsh", "--method", "all", "--format", "json",
        ],
    );
    assert_eq!(doc["lr"], 3.0);
    assert!((doc["fractional_packing"].as_f64().unwrap() - 4.0).abs() <= 1e-9);
    assert!((doc["theta"].as_f64().unwrap() - (2.0 + 2f64.sqrt())).abs() <= 1e-5);
    assert_eq!(doc["certificates_verified"], true);
    assert_eq!(doc["reports"].as_array().unwrap().len(), 3);
}

#[test]
fn single_method() {
    let doc = json_output("bounds", &["bounds", "--graph", "chsh", "--method", "lr"]);
    assert_eq!(doc["lr"], 3.0);
    assert!(doc.get("theta").is_none());
}

#[test]
fn bounds_text() {
    let out = epb(&["bounds", "--graph", "chsh", "--format", "text"]);
    let text = String::from_utf8(out.stdout).unwrap();
    assert!(text.contains("lr = 3.0000000000"));
    assert!(text.contains("theta = 3.41421356"));
}

#[test]
fn graph_round_trip_through_a_file() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("chsh.json");
    let out = epb(&[
        "graph",
        "--scenario",
        "chsh",
        "--format",
        "json",
        "--out",
        path.to_str().unwrap(),
    ]);
    assert_eq!(out.status.code(), Some(0));
    assert!(out.stdout.is_empty());
    let file: Value = serde_json::from_str(&std::fs::read_to_string(&path).unwrap()).unwrap();
    assert_eq!(file["edges"].as_array().unwrap().len(), 12);
    let from_file = json_output(
        "bounds",
        &[
            "bounds",
            "--graph-file",
            path.to_str().unwrap(),
            "--method",
            "lr",
        ],
    );
    let named = json_output("bounds", &["bounds", "--graph", "chsh", "--method", "lr"]);
    assert_eq!(
        from_file["graph"]["fingerprint"],
        named["graph"]["fingerprint"]
    );
    assert_eq!(from_file["lr"], 3.0);
}

#[test]
fn graph_json_validates() {
    json_output(
        "graph",
        &["graph", "--scenario", "chsh", "--format", "json"],
    );
}

#[test]
fn graph_dot() {
    let out = epb(&["graph", "--scenario", "chsh", "--format", "dot"]);
    let text = String::from_utf8(out.stdout).unwrap();
    assert!(text.starts_with("graph exclusivity {"));
    assert_eq!(text.lines().filter(|l| l.contains("--")).count(), 12);
    assert_eq!(text.lines().filter(|l| l.contains("[label=")).count(), 8);
}

#[test]
fn table1_verifies() {
    let doc = json_output("table1", &["table1", "--verify"]);
    assert_eq!(doc["verified"], true);
    assert_eq!(doc["exclusivity_checks"], 144);
    let sets = doc["sets"].as_array().unwrap();
    assert_eq!(sets[0]["rows"][0]["event"], "A0+ B0+ A'0+ B'1+ A0A'0+");
    assert_eq!(sets[2]["rows"][8]["probability"], "P(g_9)");
}

#[test]
fn table1_numeric_probabilities() {
    let doc = json_output("table1", &["table1", "--p", "0.25"]);
    let row = &doc["sets"][1]["rows"][2];
    assert_eq!(row["probability"], "(1/2 - p)^2");
    assert_eq!(row["value"], 0.0625);
    assert!(doc["sets"][1]["rows"][8].get("value").is_none());
}

#[test]
fn enumerate_finds_two_sets() {
    let doc = json_output("enumerate", &["enumerate", "--ninth", "A0A'0- A1A'1-"]);
    assert_eq!(doc["count"], 2);
    let tables: Vec<&Value> = doc["sets"]
        .as_array()
        .unwrap()
        .iter()
        .filter_map(|s| s.get("table1"))
        .collect();
    assert_eq!(tables, [&Value::from("e")]);
    let doc = json_output("enumerate", &["enumerate", "--ninth", "A0A'1+ A1A'0-"]);
    assert_eq!(doc["count"], 2);
}

#[test]
fn prove_general() {
    let doc = json_output("prove", &["prove", "--mode", "general", "--format", "json"]);
    assert_eq!(doc["bound"]["exact"]["exact"], "2+√2");
    assert_eq!(doc["bound"]["decimal"], "3.4142135624");
    assert_eq!(doc["aggregate"]["rendered"], "S^2 + (4 - S)^2 + 4 <= 16");
    assert_eq!(doc["enumeration"]["total"], 16);
}

#[test]
fn prove_symmetric() {
    let doc = json_output("prove", &["prove", "--mode", "symmetric"]);
    assert_eq!(doc["inequality"], "32p^2 - 16p + 1 <= 0");
    assert_eq!(doc["bound"]["exact"]["exact"], "(2+√2)/8");
    assert_eq!(doc["bound"]["decimal"], "0.4267766953");
    let names: Vec<&str> = doc["assumptions"]
        .as_array()
        .unwrap()
        .iter()
        .map(|a| a["name"].as_str().unwrap())
        .collect();
    assert!(names.contains(&"factorization"));
}

#[test]
fn identity_check_echoes_the_seed() {
    let doc = json_output(
        "identity-check",
        &["identity-check", "--samples", "10", "--seed", "5"],
    );
    assert_eq!(doc["seed"], 5);
    assert_eq!(doc["passed"], true);
    let env = Command::new(env!("CARGO_BIN_EXE_epb"))
        .args(["identity-check", "--samples", "10", "--seed", "5"])
        .env("EPB_SEED", "11")
        .output()
        .unwrap();
    let doc: Value = serde_json::from_slice(&env.stdout).unwrap();
    assert_eq!(doc["seed"], 11);
}

#[test]
fn output_is_deterministic() {
    for args in [
        &["bounds", "--graph", "chsh"][..],
        &["prove", "--mode", "general"],
        &["identity-check", "--samples", "20"],
        &["graph", "--scenario", "chsh", "--format", "dot"],
    ] {
        assert_eq!(epb(args).stdout, epb(args).stdout, "{args:?}");
    }
}

#[test]
fn usage_errors_exit_with_two() {
    for args in [
        &["bounds"][..],
        &["bounds", "--graph", "chsh", "--method", "nope"],
        &["frobnicate"],
        &["table1", "--p", "0.9"],
        &["enumerate", "--ninth", "A0+ B0+"],
        &["enumerate", "--ninth", "Q7+"],
        &["bounds", "--graph-file", "/nonexistent/graph.json"],
        &["prove", "--mode", "symmetric", "--unknown-flag"],
    ] {
        let out = epb(args);
        assert_eq!(out.status.code(), Some(2), "{args:?}");
        assert!(!out.stderr.is_empty());
    }
}

#[test]
fn bad_seed_is_a_usage_error() {
    let out = Command::new(env!("CARGO_BIN_EXE_epb"))
        .args(["identity-check", "--samples", "1"])
        .env("EPB_SEED", "not-a-number")
        .output()
        .unwrap();
    assert_eq!(out.status.code(), Some(2));
}

#[test]
fn inconsistent_graph_file_is_rejected() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("bad.json");
    std::fs::write(
        &path,
        r#"{"vertices":[{"event":"A0+ B0+","weight":1.0},{"event":"A0+ B1+","weight":1.0}],"edges":[[0,1]]}"#,
    )
    .unwrap();
    let out = epb(&["bounds", "--graph-file", path.to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(2));
}
