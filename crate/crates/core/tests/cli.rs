use std::path::{Path, PathBuf};
use std::process::Command;

use chaos_bounds::cli::{run_with_io, EXIT_OK, EXIT_USAGE, EXIT_VALIDATION};
use serde_json::Value;

fn run(args: &[&str]) -> (i32, String, String) {
    let mut out = Vec::new();
    let mut err = Vec::new();
    let argv = std::iter::once("chaos-bounds").chain(args.iter().copied());
    let code = run_with_io(argv, &mut out, &mut err);
    (code, String::from_utf8(out).unwrap(), String::from_utf8(err).unwrap())
}

fn write(dir: &Path, name: &str, text: &str) -> PathBuf {
    let path = dir.join(name);
    std::fs::write(&path, text).unwrap();
    path
}

const SYM: &str = r#"{"d":2,"n":2,"m":1,"space":{"kind":"lq","q":2.0,"weights":[1.0]},"values":[0,1,1,0]}"#;
const L3: &str = r#"{"d":2,"n":2,"m":2,"space":{"kind":"lq","q":3.0,"weights":[1.0,0.5]},"values":[1,0,0.5,-1,2,0.3,0,1]}"#;

#[test]
fn usage_errors_exit_64() {
    assert_eq!(run(&[]).0, EXIT_USAGE);
    assert_eq!(run(&["bogus"]).0, EXIT_USAGE);
    assert_eq!(run(&["bound", "--tensor", "x.json"]).0, EXIT_USAGE);
    assert_eq!(run(&["--help"]).0, EXIT_OK);
    assert_eq!(run(&["--version"]).0, EXIT_OK);
}

#[test]
fn validation_errors_exit_2() {
    let dir = tempfile::tempdir().unwrap();
    let t = write(dir.path(), "a.json", L3);
    let t = t.to_str().unwrap();
    let (code, _, err) = run(&["bound", "--tensor", t, "--p", "0.5"]);
    assert_eq!(code, EXIT_VALIDATION, "{err}");
    assert!(!err.is_empty());
    assert_eq!(run(&["norm", "--tensor", t, "--pair", "{1}|{1}"]).0, EXIT_VALIDATION);
    assert_eq!(run(&["norm", "--tensor", "/nonexistent/a.json", "--pair", "∅|{1,2}"]).0, EXIT_VALIDATION);
    let bad = write(dir.path(), "bad.json", r#"{"d":2,"n":2}"#);
    assert_eq!(run(&["tail", "--tensor", bad.to_str().unwrap(), "--t", "1"]).0, EXIT_VALIDATION);
    assert_eq!(run(&["check", "--tensor", t, "--what", "decoupling"]).0, EXIT_VALIDATION);
}

#[test]
fn json_document_shape() {
    let dir = tempfile::tempdir().unwrap();
    let t = write(dir.path(), "a.json", L3);
    let (code, out, _) = run(&["norm", "--tensor", t.to_str().unwrap(), "--pair", "∅|{1},{2}", "--seed", "3"]);
    assert_eq!(code, EXIT_OK);
    let v: Value = serde_json::from_str(&out).unwrap();
    assert_eq!(v["command"], "norm");
    assert!(v["meta"]["version"].is_string());
    assert_eq!(v["result"]["config"]["seed"], 3);
    assert!(v["result"]["estimate"]["value"].as_f64().unwrap() > 0.0);

    let (_, out, _) = run(&["norm", "--tensor", t.to_str().unwrap(), "--pair", "∅|{1},{2}", "--no-meta"]);
    let v: Value = serde_json::from_str(&out).unwrap();
    assert!(v.get("meta").is_none());
}

#[test]
fn decoupling_check_is_near_sqrt2() {
    let dir = tempfile::tempdir().unwrap();
    let t = write(dir.path(), "sym.json", SYM);
    let (code, out, err) = run(&[
        "check", "--tensor", t.to_str().unwrap(), "--what", "decoupling", "--p", "2", "--samples", "100000", "--seed", "7",
    ]);
    assert_eq!(code, EXIT_OK, "{err}");
    let v: Value = serde_json::from_str(&out).unwrap();
    let r = &v["result"]["result"];
    let ratio = r["ratio"].as_f64().unwrap();
    let se = r["stderr"].as_f64().unwrap();
    assert!((ratio - 2f64.sqrt()).abs() <= 3.0 * se, "{ratio} ± {se}");
}

#[test]
fn csv_output_and_out_file() {
    let dir = tempfile::tempdir().unwrap();
    let t = write(dir.path(), "a.json", L3);
    let dest = dir.path().join("bound.csv");
    let (code, out, err) = run(&[
        "bound",
        "--tensor",
        t.to_str().unwrap(),
        "--p",
        "2,4",
        "--side",
        "upper",
        "--format",
        "csv",
        "--out",
        dest.to_str().unwrap(),
    ]);
    assert_eq!(code, EXIT_OK, "{err}");
    assert!(out.is_empty());
    let text = std::fs::read_to_string(&dest).unwrap();
    let mut lines = text.lines();
    assert_eq!(lines.next(), Some("section,term,power,value,stderr"));
    // 6 pairs at d = 2, once per p
    assert_eq!(lines.count(), 12);
}

#[test]
fn tail_is_degree_zero_homogeneous() {
    let dir = tempfile::tempdir().unwrap();
    let a = write(dir.path(), "a.json", L3);
    let scaled = L3.replace("[1,0,0.5,-1,2,0.3,0,1]", "[2,0,1,-2,4,0.6,0,2]");
    let b = write(dir.path(), "b.json", &scaled);
    let exps = |path: &Path, t: &str| -> Vec<f64> {
        let (code, out, _) = run(&["tail", "--tensor", path.to_str().unwrap(), "--t", t, "--no-meta"]);
        assert_eq!(code, EXIT_OK);
        let v: Value = serde_json::from_str(&out).unwrap();
        let mut found = vec![];
        collect_exponents(&v, &mut found);
        found
    };
    let x = exps(&a, "1.5");
    let y = exps(&b, "3");
    assert!(!x.is_empty());
    assert_eq!(x.len(), y.len());
    for (u, w) in x.iter().zip(&y) {
        assert!((u - w).abs() <= 1e-12 * u.abs(), "{u} vs {w}");
    }
}

fn collect_exponents(v: &Value, out: &mut Vec<f64>) {
    match v {
        Value::Object(map) => {
            for (k, x) in map {
                if k == "exponent" {
                    out.extend(x.as_f64());
                } else {
                    collect_exponents(x, out);
                }
            }
        }
        Value::Array(xs) => xs.iter().for_each(|x| collect_exponents(x, out)),
        _ => {}
    }
}

#[test]
fn binary_is_deterministic_across_threads() {
    let dir = tempfile::tempdir().unwrap();
    let t = write(dir.path(), "a.json", L3);
    let exe = env!("CARGO_BIN_EXE_chaos-bounds");
    let outputs: Vec<Vec<u8>> = ["1", "3"]
        .iter()
        .map(|threads| {
            let out = Command::new(exe)
                .args(["empirical", "--tensor", t.to_str().unwrap(), "--p", "2,4", "--samples", "30000", "--no-meta"])
                .env("CHAOS_BOUNDS_THREADS", threads)
                .output()
                .unwrap();
            assert!(out.status.success());
            out.stdout
        })
        .collect();
    assert_eq!(outputs[0], outputs[1]);
}
