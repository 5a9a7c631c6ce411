use std::path::Path;
use std::process::{Command, Output};

use serde_json::Value;

fn dyadic(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_dyadic"))
        .args(args)
        .output()
        .expect("binary runs")
}

fn write(dir: &Path, name: &str, body: &str) -> String {
    let path = dir.join(name);
    std::fs::write(&path, body).unwrap();
    path.to_str().unwrap().to_owned()
}

#[test]
fn counterexample_with_three_terms_passes() {
    let out = dyadic(&[
        "verify",
        "counterexample",
        "--cases",
        "1",
        "--terms",
        "3",
        "--level",
        "4",
    ]);
    assert_eq!(out.status.code(), Some(0));
    let v: Value = serde_json::from_slice(&out.stdout).unwrap();
    assert_eq!(v["failed"], 0);
    let r = &v["reports"][0];
    assert_eq!(r["observed"]["tail_l1"], 0.125);
    assert_eq!(r["observed"]["t_limit"], 1.0);
    assert_eq!(r["observed"]["violation.ok"], true);
}

#[test]
fn unknown_suite_exits_two_and_lists_suites() {
    let dir = tempfile::tempdir().unwrap();
    let out_path = dir.path().join("r.json");
    let out = dyadic(&["verify", "bogus", "--out", out_path.to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(2));
    let err = String::from_utf8_lossy(&out.stderr);
    for name in [
        "counterexample",
        "aoki",
        "nesting",
        "huntsplit",
        "cz",
        "hormander",
        "zerolocal",
        "countable",
        "yano",
        "weak11",
    ] {
        assert!(err.contains(name), "missing {name} in {err}");
    }
    assert!(!out_path.exists());
}

#[test]
fn input_errors_exit_two() {
    assert_eq!(dyadic(&["verify", "cz", "--cases", "0"]).status.code(), Some(2));
    assert_eq!(
        dyadic(&["verify", "counterexample", "--terms", "5", "--level", "3"])
            .status
            .code(),
        Some(2)
    );
    assert_eq!(
        dyadic(&["norm", "/nonexistent/f.json", "--p", "1"]).status.code(),
        Some(2)
    );
    assert_eq!(
        dyadic(&["haar", "--k", "-3", "--j", "0", "--m", "1"])
            .status
            .code(),
        Some(2)
    );
    assert_eq!(dyadic(&["frobnicate"]).status.code(), Some(2));
}

#[test]
fn cz_suite_reports_are_byte_identical() {
    let dir = tempfile::tempdir().unwrap();
    let a = dir.path().join("a.json");
    let b = dir.path().join("b.json");
    for p in [&a, &b] {
        let out = dyadic(&[
            "verify",
            "cz",
            "--seed",
            "11",
            "--cases",
            "40",
            "--out",
            p.to_str().unwrap(),
        ]);
        assert_eq!(out.status.code(), Some(0));
    }
    let a = std::fs::read(a).unwrap();
    assert_eq!(a, std::fs::read(b).unwrap());
    let v: Value = serde_json::from_slice(&a).unwrap();
    assert_eq!(v["corpus_hash"].as_str().unwrap().len(), 40);
    assert_eq!(v["config"]["seed"], 11);
}

#[test]
fn csv_reports_flatten_with_dotted_columns() {
    let out = dyadic(&[
        "verify",
        "zerolocal",
        "--cases",
        "5",
        "--m",
        "1",
        "--level",
        "4",
        "--format",
        "csv",
    ]);
    assert_eq!(out.status.code(), Some(0));
    let text = String::from_utf8(out.stdout).unwrap();
    let header = text.lines().next().unwrap();
    assert!(header.starts_with("check,pass,"));
    assert!(header.contains("observed.support_in_I0.ok"));
    assert_eq!(text.lines().count(), 6);
}

#[test]
fn function_commands_round_trip() {
    let dir = tempfile::tempdir().unwrap();
    let f = write(
        dir.path(),
        "f.json",
        r#"{"m":0,"level":2,"values":[4.0,0.0,0.0,0.0]}"#,
    );
    let a = write(
        dir.path(),
        "a.json",
        r#"{"entries":[{"k":0,"j":0,"a":1.0},{"k":1,"j":0,"a":1.0}]}"#,
    );

    let norm: Value = serde_json::from_slice(&dyadic(&["norm", &f, "--p", "1"]).stdout).unwrap();
    assert_eq!(norm["norm"], 1.0);
    let weak: Value =
        serde_json::from_slice(&dyadic(&["norm", &f, "--p", "1", "--q", "inf"]).stdout).unwrap();
    assert_eq!(weak["norm"], 1.0);

    let profile: Value = serde_json::from_slice(&dyadic(&["rearrange", &f]).stdout).unwrap();
    assert_eq!(profile["values"][0], 4.0);

    let cz = dyadic(&["cz", &f, "--height", "1"]);
    assert_eq!(cz.status.code(), Some(0));
    let cz: Value = serde_json::from_slice(&cz.stdout).unwrap();
    assert_eq!(cz["cubes"][0]["k"], 1);

    let s = dyadic(&["apply", &f, "--coeffs", &a]);
    assert_eq!(s.status.code(), Some(0));
    let s: Value = serde_json::from_slice(&s.stdout).unwrap();
    assert_eq!(s["values"].as_array().unwrap().len(), 4);

    let d = dyadic(&["apply", &f, "--diff", "1", "--format", "csv"]);
    let text = String::from_utf8(d.stdout).unwrap();
    assert_eq!(text.lines().next(), Some("start,end,value"));
    assert_eq!(text.lines().nth(1), Some("0,0.25,2"));

    let h: Value =
        serde_json::from_slice(&dyadic(&["haar", "--k", "0", "--j", "0", "--level", "1"]).stdout).unwrap();
    assert_eq!(h["values"], serde_json::json!([1.0, -1.0]));
}

#[test]
fn random_is_seed_deterministic() {
    let a = dyadic(&["random", "--seed", "5", "--level", "6", "--m", "1"]).stdout;
    let b = dyadic(&["random", "--seed", "5", "--level", "6", "--m", "1"]).stdout;
    let c = dyadic(&["random", "--seed", "6", "--level", "6", "--m", "1"]).stdout;
    assert_eq!(a, b);
    assert_ne!(a, c);
    assert_eq!(
        dyadic(&["random", "--kmin", "2", "--kmax", "2"]).status.code(),
        Some(2)
    );
}
