use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use serde_json::Value;

fn bin() -> Command {
    Command::new(env!("CARGO_BIN_EXE_longres"))
}

fn fixture() -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("fixtures/parallel_resistor.json")
}

fn run(args: &[&str]) -> Output {
    bin().args(args).output().expect("binary runs")
}

fn run_to(dir: &Path, name: &str, args: &[&str]) -> (i32, Value) {
    let out = dir.join(name);
    let mut all: Vec<&str> = args.to_vec();
    let out_str = out.to_str().unwrap().to_string();
    all.extend(["--out", &out_str]);
    let status = run(&all).status.code().unwrap();
    let doc = serde_json::from_str(&std::fs::read_to_string(&out).unwrap()).unwrap();
    (status, doc)
}

fn complex(v: &Value) -> (f64, f64) {
    (v[0].as_f64().unwrap(), v[1].as_f64().unwrap())
}

#[test]
fn check_on_bundled_fixture_passes() {
    let dir = tempfile::tempdir().unwrap();
    let (code, doc) = run_to(dir.path(), "check.json", &["check", fixture().to_str().unwrap()]);
    assert_eq!(code, 0);
    assert_eq!(doc["passed"], Value::Bool(true));
    let names: Vec<&str> = doc["checks"].as_array().unwrap().iter().map(|c| c["name"].as_str().unwrap()).collect();
    assert!(names.contains(&"operator_positivity"));
    assert!(names.contains(&"symmetry"));
}

#[test]
fn eval_reports_closed_form_values() {
    let dir = tempfile::tempdir().unwrap();
    let (code, doc) = run_to(dir.path(), "eval.json", &["eval", fixture().to_str().unwrap()]);
    assert_eq!(code, 0);
    let values = doc["values"]["values"].as_array().unwrap();
    let (re, im) = complex(&values[0][0][0]);
    assert!((re - 0.5).abs() < 1e-15 && im.abs() < 1e-15);
    let (re, _) = complex(&values[1][0][0]);
    assert!((re - 1.0).abs() < 1e-15);
    // z1 z2 / (z1 + z2) at (0.5 + 0.3i, 2 - i)
    let (a, b) = ((0.5f64, 0.3f64), (2.0f64, -1.0f64));
    let num = (a.0 * b.0 - a.1 * b.1, a.0 * b.1 + a.1 * b.0);
    let den = (a.0 + b.0, a.1 + b.1);
    let d2 = den.0 * den.0 + den.1 * den.1;
    let want = ((num.0 * den.0 + num.1 * den.1) / d2, (num.1 * den.0 - num.0 * den.1) / d2);
    let got = complex(&values[2][0][0]);
    assert!((got.0 - want.0).abs() < 1e-14 && (got.1 - want.1).abs() < 1e-14);
}

#[test]
fn realize_reconstruct_eval_round_trip() {
    let dir = tempfile::tempdir().unwrap();
    let d = dir.path();
    let input = fixture();
    let (code, direct) = run_to(d, "direct.json", &["eval", input.to_str().unwrap()]);
    assert_eq!(code, 0);
    let (code, realized) = run_to(d, "realized.json", &["realize", input.to_str().unwrap()]);
    assert_eq!(code, 0, "{realized}");
    assert!(realized["problem"]["colligation"].is_object());
    let realized_path = d.join("realized.json");
    let (code, rebuilt) = run_to(d, "rebuilt.json", &["reconstruct", realized_path.to_str().unwrap()]);
    assert_eq!(code, 0, "{rebuilt}");

    // The reconstructed pencil carries no points, so evaluate at the fixture's.
    let mut problem = rebuilt["problem"].clone();
    let original: Value = serde_json::from_str(&std::fs::read_to_string(&input).unwrap()).unwrap();
    problem["points"] = original["points"].clone();
    let path = d.join("rebuilt_problem.json");
    std::fs::write(&path, problem.to_string()).unwrap();
    let (code, again) = run_to(d, "again.json", &["eval", path.to_str().unwrap()]);
    assert_eq!(code, 0);

    let a = direct["values"]["values"].as_array().unwrap();
    let b = again["values"]["values"].as_array().unwrap();
    assert_eq!(a.len(), b.len());
    for (x, y) in a.iter().zip(b) {
        let (x, y) = (complex(&x[0][0]), complex(&y[0][0]));
        assert!((x.0 - y.0).hypot(x.1 - y.1) <= 1e-6, "{x:?} vs {y:?}");
    }
}

#[test]
fn real_realization_passes_realcheck() {
    let dir = tempfile::tempdir().unwrap();
    let (code, _) = run_to(dir.path(), "r.json", &["realize", "--real", fixture().to_str().unwrap()]);
    assert_eq!(code, 0);
    let path = dir.path().join("r.json");
    let (code, doc) = run_to(dir.path(), "rc.json", &["realcheck", path.to_str().unwrap()]);
    assert_eq!(code, 0);
    assert!(doc["checks"].as_array().unwrap().iter().any(|c| c["name"] == "real_colligation"));
}

#[test]
fn reports_are_byte_stable() {
    let input = fixture();
    for cmd in ["check", "realize", "decompose"] {
        let a = run(&[cmd, input.to_str().unwrap(), "--seed", "3"]);
        let b = run(&[cmd, input.to_str().unwrap(), "--seed", "3"]);
        assert_eq!(a.status.code(), Some(0));
        assert_eq!(a.stdout, b.stdout, "{cmd} output differs between runs");
    }
}

#[test]
fn failed_check_exits_one() {
    // f(z) = z G*G with G = [1, i] is not real for entrywise conjugation.
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("complex.json");
    std::fs::write(
        &path,
        r#"{"version": 1, "shape": {"n": [1], "m": [1], "u": 2, "h": 0},
            "pencil": [[[[1.0, 0.0], [0.0, 1.0]]]]}"#,
    )
    .unwrap();
    let (code, doc) = run_to(dir.path(), "out.json", &["realcheck", path.to_str().unwrap()]);
    assert_eq!(code, 1);
    assert_eq!(doc["passed"], Value::Bool(false));
}

#[test]
fn malformed_input_exits_two() {
    let dir = tempfile::tempdir().unwrap();
    let cases = [
        ("truncated.json", "{\"version\": 1, "),
        ("version.json", r#"{"version": 7}"#),
        (
            "shape.json",
            r#"{"version": 1, "shape": {"n": [1, 1], "m": [1, 1], "u": 1, "h": 1},
                "pencil": [[[[1.0, 0.0], [1.0, 0.0]]]]}"#,
        ),
        (
            "point.json",
            r#"{"version": 1, "shape": {"n": [1], "m": [1], "u": 1, "h": 0},
                "pencil": [[[[1.0, 0.0]]]], "points": [[[[[1.0, 0.0], [0.0, 0.0]]]]]}"#,
        ),
    ];
    for (name, text) in cases {
        let path = dir.path().join(name);
        std::fs::write(&path, text).unwrap();
        let out = run(&["eval", path.to_str().unwrap()]);
        assert_eq!(out.status.code(), Some(2), "{name}");
        assert!(!out.stderr.is_empty(), "{name}: no diagnostic");
    }
    assert_eq!(run(&["eval", "/nonexistent/problem.json"]).status.code(), Some(2));
    assert_eq!(run(&["frobnicate"]).status.code(), Some(2));
}

#[test]
fn demo_passes() {
    let out = run(&["demo"]);
    assert_eq!(out.status.code(), Some(0));
    let doc: Value = serde_json::from_slice(&out.stdout).unwrap();
    assert_eq!(doc["command"], "demo");
    assert_eq!(doc["passed"], Value::Bool(true));
}
