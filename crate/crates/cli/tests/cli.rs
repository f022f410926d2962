use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use serde_json::Value;

fn bin() -> Command {
    let mut c = Command::new(env!("CARGO_BIN_EXE_segre-lines"));
    c.env_remove("SEGRE_LINES_THREADS");
    c
}

fn write(dir: &Path, name: &str, text: &str) -> PathBuf {
    let p = dir.join(name);
    std::fs::write(&p, text).unwrap();
    p
}

fn form(coeffs: &[i64]) -> String {
    let c: Vec<String> = coeffs.iter().map(|x| format!("\"{x}\"")).collect();
    format!(r#"{{"degree":{},"coeffs":[{}]}}"#, coeffs.len() - 1, c.join(","))
}

fn curve(rows: &[&[i64]]) -> String {
    let p: Vec<String> = rows.iter().map(|r| form(r)).collect();
    format!(r#"{{"n":{},"p":[{}]}}"#, rows.len(), p.join(","))
}

const ONE3: &[&[i64]] = &[&[1, 0, 0, 0, 0], &[0, 0, 1, 0, 0], &[0, 0, 0, 0, 1]];
const CSTAR: &[&[i64]] = &[&[0, 2, 0, 2, 0], &[1, 0, 0, 0, -1], &[0, 2, 0, -2, 0]];

fn run_ok(args: &[&str]) -> Value {
    let out = bin().args(args).output().unwrap();
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    serde_json::from_slice(&out.stdout).unwrap()
}

fn run(args: &[&str]) -> Output {
    bin().args(args).output().unwrap()
}

#[test]
fn index_of_one_example() {
    let dir = tempfile::tempdir().unwrap();
    let f = write(dir.path(), "curve.json", &curve(ONE3));
    let v = run_ok(&["index", "--input", f.to_str().unwrap()]);
    assert_eq!(v["euler"], 1);
    assert_eq!(v["det"], "1");
    assert_eq!(v["seed"], 42);
}

#[test]
fn verify_all_on_cstar() {
    let dir = tempfile::tempdir().unwrap();
    let f = write(dir.path(), "curve.json", &curve(CSTAR));
    let v = run_ok(&["verify-all", "--input", f.to_str().unwrap()]);
    assert_eq!(v["euler"], -1);
    assert_eq!(v["segre"], -1);
    assert_eq!(v["welschinger"], -1);
    assert_eq!(v["chord_index"], -1);
    assert_eq!(v["agreement"], true);
    assert_eq!(v["det"], "-64");
}

#[test]
fn wallcross_between_equal_curves() {
    let dir = tempfile::tempdir().unwrap();
    let a = write(dir.path(), "a.json", &curve(CSTAR));
    let v = run_ok(&["wallcross", "--from", a.to_str().unwrap(), "--to", a.to_str().unwrap()]);
    assert_eq!(v["crossings"], Value::Array(vec![]));
    assert_eq!(v["constant"], true);
}

#[test]
fn nodes_segre_welschinger_secants() {
    let dir = tempfile::tempdir().unwrap();
    let f = write(dir.path(), "curve.json", &curve(CSTAR));
    let p = f.to_str().unwrap();
    let v = run_ok(&["nodes", "--input", p]);
    assert_eq!(v["chord_diagram"]["interlaced"], 1);
    assert_eq!(v["nodes"]["total_with_multiplicity"], 3);
    let v = run_ok(&["segre", "--input", p]);
    assert_eq!(v["segre"], -1);
    assert_eq!(v["certificate_ok"], true);
    let v = run_ok(&["welschinger", "--input", p]);
    assert_eq!(v["welschinger"], -1);
    assert!(v["endpoint_quaternion"].is_array());
    let v = run_ok(&["secants", "--input", p]);
    assert_eq!(v["secants"]["certificate_ok"], true);
}

#[test]
fn generate_from_n_and_from_config() {
    let v = run_ok(&["generate", "--n", "4"]);
    assert_eq!(v["det"], "1");
    let dir = tempfile::tempdir().unwrap();
    let cfg = r#"{"points":[{"real":["1","0","0"]},{"real":["0","1","0"]},{"real":["0","0","1"]}],
        "conic":{"rows":3,"cols":3,"entries":["1","0","0","0","1","0","0","0","-1"]}}"#;
    let f = write(dir.path(), "cfg.json", cfg);
    let v = run_ok(&["generate", "--n", "3", "--input", f.to_str().unwrap()]);
    assert_eq!(v["ground_truth"], -1);
    assert_eq!(v["inside"], 1);
}

#[test]
fn lines_of_fermat_cubic() {
    let dir = tempfile::tempdir().unwrap();
    let mut terms = Vec::new();
    for i in 0..4 {
        let mut e = [0; 4];
        e[i] = 3;
        terms.push(format!(r#"{{"exps":{e:?},"c":"1"}}"#));
    }
    let f = write(dir.path(), "x.json", &format!(r#"{{"n":2,"terms":[{}]}}"#, terms.join(",")));
    let v = run_ok(&["lines", "--input", f.to_str().unwrap(), "--starts", "100"]);
    assert_eq!(v["real_lines"], 3);
    assert_eq!(v["signed_count"], 3);
    assert_eq!(v["certificate_ok"], true);
}

#[test]
fn exit_codes() {
    let dir = tempfile::tempdir().unwrap();
    // det A_C = 0: p_3 = p_1 + p_2
    let f = write(dir.path(), "dep.json", &curve(&[&[1, 0, 0, 0, 0], &[0, 0, 0, 0, 1], &[1, 0, 0, 0, 1]]));
    assert_eq!(run(&["index", "--input", f.to_str().unwrap()]).status.code(), Some(2));

    let bad = write(dir.path(), "bad.json", "{\"n\": 3,\n \"p\": [oops]}");
    let out = run(&["index", "--input", bad.to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(1));
    let msg = String::from_utf8_lossy(&out.stderr);
    assert!(msg.contains(":2:"), "{msg}");

    assert_eq!(run(&["index"]).status.code(), Some(1));
}

#[test]
fn output_file_is_written_and_reproducible() {
    let dir = tempfile::tempdir().unwrap();
    let f = write(dir.path(), "curve.json", &curve(CSTAR));
    let o1 = dir.path().join("r1.json");
    let o2 = dir.path().join("r2.json");
    for o in [&o1, &o2] {
        let out = bin()
            .args(["verify-all", "--input", f.to_str().unwrap(), "--output", o.to_str().unwrap(), "--seed", "7"])
            .env("SEGRE_LINES_THREADS", "2")
            .output()
            .unwrap();
        assert!(out.status.success());
    }
    let a = std::fs::read(&o1).unwrap();
    assert_eq!(a, std::fs::read(&o2).unwrap());
    let v: Value = serde_json::from_slice(&a).unwrap();
    assert_eq!(v["seed"], 7);
    let leftovers = std::fs::read_dir(dir.path()).unwrap().count();
    assert_eq!(leftovers, 3);
}

#[test]
fn pretty_output() {
    let dir = tempfile::tempdir().unwrap();
    let f = write(dir.path(), "curve.json", &curve(ONE3));
    let out = run(&["index", "--input", f.to_str().unwrap(), "--pretty"]);
    assert!(String::from_utf8_lossy(&out.stdout).contains("\n  \"euler\": 1"));
}
