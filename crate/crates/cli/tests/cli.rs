use std::io::Write;
use std::process::Command;

use serde_json::Value;
use tempfile::NamedTempFile;

use metric_lines_cli::{run_cli, EXIT_OK, EXIT_USAGE};

fn run(args: &[&str]) -> (i32, String, String) {
    let (mut out, mut err) = (Vec::new(), Vec::new());
    let code = run_cli(std::iter::once("metric-lines").chain(args.iter().copied()), &mut out, &mut err);
    (code, String::from_utf8(out).unwrap(), String::from_utf8(err).unwrap())
}

fn run_json(args: &[&str]) -> Value {
    let (code, out, err) = run(args);
    assert_eq!(code, EXIT_OK, "{args:?}: {err}");
    serde_json::from_str(&out).unwrap()
}

fn matrix_file(text: &str) -> NamedTempFile {
    let mut f = NamedTempFile::new().unwrap();
    f.write_all(text.as_bytes()).unwrap();
    f
}

const PATH3: &str = "# path on three points\n3\n0 1 2\n1 0 1\n2 1 0\n";

#[test]
fn analyze_path_text() {
    let f = matrix_file(PATH3);
    let (code, out, _) = run(&["analyze", f.path().to_str().unwrap()]);
    assert_eq!(code, EXIT_OK);
    assert!(out.contains("distinct lines: 1\n"), "{out}");
    assert!(out.contains("universal line: present"));
    assert!(out.contains("De Bruijn-Erdos property: holds"));
    assert!(out.contains("check twin-line-laws: violations=0"));
}

#[test]
fn analyze_path_json() {
    let f = matrix_file(PATH3);
    let (code, out, _) = run(&["analyze", "--json", "--no-timing", f.path().to_str().unwrap()]);
    assert_eq!(code, EXIT_OK);
    assert!(out.contains(r#""verdict":{"line_count":1,"has_universal":true,"holds":true}"#), "{out}");
    assert!(out.contains(r#""violations":[]"#));
    let v: Value = serde_json::from_str(&out).unwrap();
    assert_eq!(v["schema_version"], "1");
    assert_eq!(v["subcommand"], "analyze");
    assert_eq!(v["runtime_ms"], 0);
    assert_eq!(v["results"]["lines"][0]["line"], serde_json::json!([0, 1, 2]));
    assert_eq!(v["results"]["structure"]["twin_pairs"], serde_json::json!([[0, 2]]));
}

#[test]
fn rationals_serialize_as_strings() {
    let f = matrix_file("3\n0 1/2 1\n1/2 0 0.5\n1 0.5 0\n");
    let v = run_json(&["analyze", "--json", f.path().to_str().unwrap()]);
    assert_eq!(v["results"]["matrix"]["rows"][0], serde_json::json!(["0", "1/2", "1"]));
    assert_eq!(v["results"]["is_one_two"], false);
    assert!(v["results"]["structure"].is_null());
}

#[test]
fn bad_inputs_are_usage_errors() {
    let (code, _, err) = run(&["analyze", "/nonexistent/matrix.txt"]);
    assert_eq!(code, EXIT_USAGE);
    assert!(err.contains("/nonexistent/matrix.txt"), "{err}");

    let f = matrix_file("3\n0 1 3\n1 0 1\n3 1 0\n");
    let (code, _, err) = run(&["analyze", f.path().to_str().unwrap()]);
    assert_eq!(code, EXIT_USAGE);
    assert!(err.contains("triangle"), "{err}");

    assert_eq!(run(&["frobnicate"]).0, EXIT_USAGE);
    assert_eq!(run(&["enumerate", "--n", "4", "--bogus"]).0, EXIT_USAGE);
    assert_eq!(run(&["enumerate", "--n", "four"]).0, EXIT_USAGE);
    assert_eq!(run(&["enumerate", "--n", "9"]).0, EXIT_USAGE);
    assert_eq!(run(&["enumerate", "--n", "8"]).0, EXIT_USAGE);
    assert_eq!(run(&["--jobs", "0", "witness-c8"]).0, EXIT_USAGE);
    assert_eq!(run(&[]).0, EXIT_USAGE);
}

#[test]
fn help_succeeds() {
    let (code, out, _) = run(&["--help"]);
    assert_eq!(code, EXIT_OK);
    assert!(out.contains("enumerate"));
}

#[test]
fn enumerate_reports() {
    let v = run_json(&["enumerate", "--n", "3", "--json"]);
    assert_eq!(v["results"]["total_codes"], 8);
    assert_eq!(v["results"]["dbe_failures"], 0);
    assert_eq!(v["results"]["failure_witnesses"], serde_json::json!([]));
    assert_eq!(v["results"]["checks"].as_array().unwrap().len(), 5);

    let v = run_json(&["enumerate", "--n", "4", "--mode", "iso", "--json"]);
    assert_eq!(v["results"]["iso"]["canonical_class_count"], 11);
    assert_eq!(v["results"]["dbe_failures"], 0);
}

#[test]
fn enumerate_text_traces_every_check() {
    let (code, out, _) = run(&["enumerate", "--n", "5"]);
    assert_eq!(code, EXIT_OK);
    assert!(out.contains("De Bruijn-Erdos failures: 0"));
    for name in [
        "distinct-lines",
        "twin-line-laws",
        "full-cover-universal",
        "twin-free-class-shape",
        "class-size-bound",
    ] {
        assert!(out.contains(&format!("check {name}: spaces=")), "{name} missing:\n{out}");
    }
}

#[test]
fn claims_sample_with_oracle() {
    let v = run_json(&["claims", "--n", "9", "--sample", "--trials", "300", "--seed", "1", "--oracle", "--json"]);
    assert_eq!(v["inputs"]["trials"], 300);
    let (code, _, _) = run(&["claims", "--n", "5", "--oracle"]);
    assert_eq!(code, EXIT_OK);
}

#[test]
fn witness_c8_lists_six_spaces() {
    let v = run_json(&["witness-c8", "--json"]);
    let ws = v["results"]["witnesses"].as_array().unwrap();
    assert_eq!(ws.len(), 6);
    for w in ws {
        assert!(w["line_count"].as_u64().unwrap() >= 6);
        assert_eq!(w["lines"].as_array().unwrap().len() as u64, w["line_count"].as_u64().unwrap());
    }
}

#[test]
fn zero_trials() {
    let v = run_json(&["random-metrics", "--trials", "0", "--json"]);
    assert_eq!(v["results"]["failures"], 0);
    for row in v["results"]["random"].as_array().unwrap() {
        assert_eq!(row["trials"], 0);
    }
}

#[test]
fn output_is_independent_of_jobs() {
    for args in [
        &["random-metrics", "--trials", "500", "--seed", "5"][..],
        &["min-lines", "--n-hi", "6"],
        &["claims", "--n", "6", "--sample", "--trials", "2000"],
        &["enumerate", "--n", "5", "--mode", "iso"],
    ] {
        let with = |jobs: &str| {
            let full = [args, &["--json", "--no-timing", "--jobs", jobs]].concat();
            let (code, out, _) = run(&full);
            assert_eq!(code, EXIT_OK);
            out
        };
        let one = with("1");
        assert_eq!(one, with("1"), "{args:?} not repeatable");
        assert_eq!(one, with("3"), "{args:?} depends on --jobs");
    }
}

#[test]
fn binary_exit_codes() {
    let bin = env!("CARGO_BIN_EXE_metric-lines");
    let ok = Command::new(bin).args(["witness-c8"]).output().unwrap();
    assert_eq!(ok.status.code(), Some(EXIT_OK));
    assert!(String::from_utf8_lossy(&ok.stdout).contains("z"));
    let bad = Command::new(bin).args(["enumerate"]).output().unwrap();
    assert_eq!(bad.status.code(), Some(EXIT_USAGE));
    assert!(bad.stdout.is_empty());
}
