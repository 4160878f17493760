use std::path::{Path, PathBuf};
use std::process::Command;

use floiation::cli::{run, CliError};
use floiation::render::RenderError;
use serde_json::Value;
use tempfile::TempDir;

fn order(name: &str) -> String {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("orders").join(name).display().to_string()
}

fn fl(args: &[&str]) -> i32 {
    run(std::iter::once("floiation").chain(args.iter().copied()))
}

fn put(dir: &TempDir, name: &str, text: &str) -> String {
    let p = dir.path().join(name);
    std::fs::write(&p, text).unwrap();
    p.display().to_string()
}

fn json(p: &Path) -> Value {
    serde_json::from_str(&std::fs::read_to_string(p).unwrap()).unwrap()
}

fn out(dir: &TempDir, name: &str) -> PathBuf {
    dir.path().join(name)
}

#[test]
fn validate_bundled_solid() {
    let d = TempDir::new().unwrap();
    let o = out(&d, "v.json");
    assert_eq!(fl(&["validate", "T3CUBE.json", "--json", o.to_str().unwrap()]), 0);
    let v = json(&o);
    assert_eq!((v["E"].as_u64(), v["T"].as_u64()), (Some(7), Some(6)));
}

#[test]
fn torus_classify_lex() {
    let d = TempDir::new().unwrap();
    let o = out(&d, "t.json");
    assert_eq!(fl(&["torus", "classify", "--order", &order("torus_lex.json"), "--json", o.to_str().unwrap()]), 0);
    let v = json(&o);
    assert_eq!(v["archimedean"], false);
    assert_eq!(v["closed_leaf_class"], serde_json::json!([1, 0]));
}

#[test]
fn audit3_enumerate_writes_all_rows() {
    let d = TempDir::new().unwrap();
    let (c, j) = (out(&d, "a.csv"), out(&d, "a.json"));
    let code = fl(&[
        "audit3", "--complex", "T3CUBE.json", "--enumerate", "--csv", c.to_str().unwrap(), "--json", j.to_str().unwrap(),
    ]);
    assert_eq!(code, 0);
    assert_eq!(std::fs::read_to_string(&c).unwrap().lines().count(), 129);
    let v = json(&j);
    assert_eq!(v["regularity_mismatches"], 0);
    assert_eq!(v["bi_invariant_orders"]["orders"].as_array().unwrap().len(), 48);
    assert_eq!(fl(&["audit3", "--complex", "T3CUBE", "--direction", "1,1,1,1,1,1,1"]), 0);
}

#[test]
fn straighten_is_deterministic_and_renders() {
    let d = TempDir::new().unwrap();
    let (a, b, s) = (out(&d, "a.json"), out(&d, "b.json"), out(&d, "l.svg"));
    let o = order("oct8_lex.json");
    for p in [&a, &b] {
        let code = fl(&["straighten", "--order", &o, "--samples", "12", "--json", p.to_str().unwrap(), "--svg", s.to_str().unwrap()]);
        assert_eq!(code, 0);
    }
    assert_eq!(std::fs::read(&a).unwrap(), std::fs::read(&b).unwrap());
    let svg = std::fs::read_to_string(&s).unwrap();
    assert!(svg.contains("<circle"));
    let n = json(&a)["geodesics"].as_array().unwrap().len();
    // Eight polygon sides plus one element per geodesic.
    assert_eq!(svg.matches("<path").count() + svg.matches("<line").count(), 8 + n);
    let c = out(&d, "c.json");
    assert_eq!(fl(&["compare-laminations", a.to_str().unwrap(), b.to_str().unwrap(), "--json", c.to_str().unwrap()]), 0);
    assert_eq!(json(&c)["hausdorff"], 0.0);
}

#[test]
fn trace_and_perturb_run() {
    let d = TempDir::new().unwrap();
    let t = out(&d, "t.json");
    let code = fl(&["floation", "trace", "--order", &order("oct8_lex.json"), "--max-crossings", "5", "--json", t.to_str().unwrap()]);
    assert_eq!(code, 0);
    assert_eq!(json(&t)["crossings"], 10);
    let code = fl(&[
        "floation", "trace", "--complex", "TOR2", "--order", &order("torus_sqrt2.json"), "--table", "--max-crossings", "3",
    ]);
    assert_eq!(code, 0);
    let c = out(&d, "p.csv");
    let code = fl(&["perturb", "--order", &order("oct8_lex.json"), "--samples", "6", "--sizes", "0,1/100", "--csv", c.to_str().unwrap()]);
    assert_eq!(code, 0);
    assert_eq!(std::fs::read_to_string(&c).unwrap().lines().count(), 3);
}

#[test]
fn orders_describe() {
    assert_eq!(fl(&["orders", "describe", &order("z3_lex.json")]), 0);
}

#[test]
fn error_exit_codes() {
    let d = TempDir::new().unwrap();
    assert_eq!(fl(&["frobnicate"]), 2);
    assert_eq!(fl(&["validate", "/nonexistent/x.json"]), 3);
    assert_eq!(fl(&["audit3", "--complex", "T3CUBE"]), 4);
    assert_eq!(fl(&["floation", "trace", "--order", &order("oct8_lex.json"), "--level", "x"]), 4);
    let bad = put(&d, "bad.json", r#"{"kind":"surface","name":"bad"}"#);
    assert_eq!(fl(&["validate", &bad]), 5);
    let bad_order = put(&d, "o.json", r#"{"backend":"nope"}"#);
    assert_eq!(fl(&["orders", "describe", &bad_order]), 6);
    let table = put(&d, "u.json", r#"{"backend":"user_table","generators":["a","b"],"table":[["e",0],["a",1]]}"#);
    assert_eq!(fl(&["floation", "trace", "--complex", "TOR2", "--order", &table, "--table"]), 7);
    assert_eq!(fl(&["torus", "classify", "--order", &order("torus_lex.json"), "--complex", "OCT8"]), 8);
    assert_eq!(fl(&["straighten", "--complex", "TOR2", "--order", &order("torus_lex.json")]), 9);
    let empty = put(&d, "e.json", r#"{"geodesics":[]}"#);
    let one = put(&d, "one.json", r#"{"geodesics":[{"a":0.1,"b":2.0}]}"#);
    assert_eq!(fl(&["compare-laminations", &empty, &one]), 10);
    assert_eq!(fl(&["audit3", "--complex", "T3CUBE", "--direction", "1,1"]), 11);
    assert_eq!(CliError::from(RenderError::EmptyScene).exit_code(), 12);
}

#[test]
fn binary_reports_exit_status() {
    let bin = env!("CARGO_BIN_EXE_floiation");
    let ok = Command::new(bin).args(["validate", "TOR2"]).output().unwrap();
    assert!(ok.status.success());
    let v: Value = serde_json::from_slice(&ok.stdout).unwrap();
    assert_eq!(v["V"], 1);
    let bad = Command::new(bin).args(["validate", "/nonexistent"]).output().unwrap();
    assert_eq!(bad.status.code(), Some(3));
}
