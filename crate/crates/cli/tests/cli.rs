use std::fs;
use std::path::{Path, PathBuf};

use serde_json::Value;
use tempfile::TempDir;

use ppm_cli::{run, EXIT_INTERNAL, EXIT_INVALID, EXIT_NO_CANDIDATE, EXIT_OK};

const DUOPOLY: &str = r#"{
  "segments": [{ "id": "market", "demand": 500 }],
  "firms": [
    { "id": "north", "products": [
      { "id": "basic", "price": [4.0], "utility": [0.8] },
      { "id": "premium", "price": [11.0], "utility": [-0.3] } ] },
    { "id": "south", "products": [
      { "id": "lite", "price": [3.0], "utility": [1.1] },
      { "id": "pro", "price": [9.0], "utility": [0.2] } ] }
  ]
}"#;

const SINGLETONS: &str = r#"{
  "segments": [{ "id": "all", "demand": 100 }],
  "firms": [
    { "id": "a", "products": [{ "id": "x", "price": [2.0], "utility": [0.0] }] },
    { "id": "b", "products": [{ "id": "y", "price": [3.0], "utility": [0.5] }] }
  ]
}"#;

const TWO_SEGMENTS: &str = r#"{
  "segments": [{ "id": "young", "demand": 100 }, { "id": "old", "demand": 40 }],
  "firms": [
    { "id": "a", "products": [
      { "id": "x", "price": [2.0, 3.0], "utility": [0.0, 1.0] },
      { "id": "y", "price": [5.0, 4.0], "utility": [-1.0, 0.5] } ] },
    { "id": "b", "products": [
      { "id": "x", "price": [2.5, 2.5], "utility": [0.2, 0.3] },
      { "id": "z", "price": [6.0, 1.0], "utility": [0.0, 0.0] } ] }
  ]
}"#;

struct Workspace {
    dir: TempDir,
}

struct Run {
    code: i32,
    stdout: String,
    stderr: String,
}

impl Workspace {
    fn new() -> Self {
        Self {
            dir: tempfile::tempdir().unwrap(),
        }
    }

    fn file(&self, name: &str, text: &str) -> PathBuf {
        let path = self.dir.path().join(name);
        fs::write(&path, text).unwrap();
        path
    }

    fn path(&self, name: &str) -> PathBuf {
        self.dir.path().join(name)
    }

    fn run(&self, args: &[&str]) -> Run {
        let mut argv = vec!["ppm"];
        argv.extend_from_slice(args);
        let (mut out, mut err) = (Vec::new(), Vec::new());
        let code = run(argv, &mut out, &mut err);
        Run {
            code,
            stdout: String::from_utf8(out).unwrap(),
            stderr: String::from_utf8(err).unwrap(),
        }
    }
}

fn s(p: &Path) -> &str {
    p.to_str().unwrap()
}

fn report(run: &Run) -> Value {
    serde_json::from_str(&run.stdout)
        .unwrap_or_else(|e| panic!("{e}: {}{}", run.stdout, run.stderr))
}

/// Profile file built from a report's `{firm: {product: mass}}` object.
fn profile_file(ws: &Workspace, name: &str, strategies: &Value) -> PathBuf {
    ws.file(
        name,
        &serde_json::json!({ "strategies": strategies }).to_string(),
    )
}

#[test]
fn solve_rejects_single_product_firms() {
    let ws = Workspace::new();
    let sc = ws.file("s.json", SINGLETONS);
    let r = ws.run(&["solve", "--scenario", s(&sc)]);
    assert_eq!(r.code, EXIT_INVALID);
    assert!(r.stderr.contains("at least 2"), "{}", r.stderr);
}

#[test]
fn solve_rejects_several_segments() {
    let ws = Workspace::new();
    let sc = ws.file("s.json", TWO_SEGMENTS);
    let r = ws.run(&["solve", "--scenario", s(&sc)]);
    assert_eq!(r.code, EXIT_INVALID);
    assert!(r.stderr.contains("single segment"), "{}", r.stderr);
}

#[test]
fn unreachable_tolerance_reports_no_candidate() {
    let ws = Workspace::new();
    let sc = ws.file("d.json", DUOPOLY);
    let r = ws.run(&[
        "solve",
        "--scenario",
        s(&sc),
        "--tol",
        "1e-30",
        "--starts",
        "2",
    ]);
    assert_eq!(r.code, EXIT_NO_CANDIDATE, "{}", r.stderr);
}

#[test]
fn verify_unique_singleton_profile() {
    let ws = Workspace::new();
    let sc = ws.file("s.json", SINGLETONS);
    let p = ws.file(
        "p.json",
        r#"{ "strategies": { "a": { "x": 1.0 }, "b": { "y": 1.0 } } }"#,
    );
    let r = ws.run(&["verify", "--scenario", s(&sc), "--profile", s(&p)]);
    assert_eq!(r.code, EXIT_OK, "{}", r.stderr);
    let rep = report(&r);
    assert_eq!(rep["result"]["epsilon"].as_f64(), Some(0.0));
    assert_eq!(rep["result"]["is_epsilon_nash"], Value::Bool(true));
    assert!(r.stderr.contains("epsilon-Nash"));
}

#[test]
fn solve_then_verify_agree_and_report_round_trips() {
    let ws = Workspace::new();
    let sc = ws.file("d.json", DUOPOLY);
    let solved = ws.run(&[
        "solve",
        "--scenario",
        s(&sc),
        "--seed",
        "3",
        "--no-timestamp",
    ]);
    assert_eq!(solved.code, EXIT_OK, "{}", solved.stderr);
    let rep = report(&solved);
    let candidates = rep["result"]["candidates"].as_array().unwrap();
    assert!(!candidates.is_empty());
    for (n, c) in candidates.iter().enumerate() {
        let p = profile_file(&ws, &format!("c{n}.json"), &c["profile"]);
        let scale = c["verification"]["scale"].as_f64().unwrap();

        let verified = ws.run(&["verify", "--scenario", s(&sc), "--profile", s(&p)]);
        assert_eq!(verified.code, EXIT_OK, "{}", verified.stderr);
        let a = c["verification"]["epsilon"].as_f64().unwrap();
        let b = report(&verified)["result"]["epsilon"].as_f64().unwrap();
        assert!((a - b).abs() <= 1e-9 * scale, "{a} vs {b}");

        let evaluated = ws.run(&["eval", "--scenario", s(&sc), "--profile", s(&p)]);
        assert_eq!(evaluated.code, EXIT_OK);
        let eval = report(&evaluated);
        for f in c["firms"].as_array().unwrap() {
            let firm = f["firm"].as_str().unwrap();
            let stated = f["payoff"].as_f64().unwrap();
            let again = eval["result"]["firms"]
                .as_array()
                .unwrap()
                .iter()
                .find(|e| e["firm"] == firm)
                .unwrap()["payoff"]
                .as_f64()
                .unwrap();
            assert!((stated - again).abs() <= 1e-9 * stated.abs());
        }
    }
}

#[test]
fn reports_are_reproducible_without_timestamp() {
    let ws = Workspace::new();
    let sc = ws.file("d.json", DUOPOLY);
    let args = [
        "solve",
        "--scenario",
        s(&sc),
        "--seed",
        "7",
        "--no-timestamp",
    ];
    let (a, b) = (ws.run(&args), ws.run(&args));
    assert_eq!(a.stdout, b.stdout);
    let rep = report(&a);
    assert!(rep.get("timestamp").is_none() && rep.get("timing").is_none());

    let stamped = report(&ws.run(&["solve", "--scenario", s(&sc)]));
    assert!(stamped["timestamp"].is_string());
    assert!(stamped["timing"]["elapsed_ms"].is_number());
    assert_eq!(stamped["scenario"]["sha256"], rep["scenario"]["sha256"]);
}

#[test]
fn sequential_and_parallel_reports_match() {
    let ws = Workspace::new();
    let sc = ws.file("d.json", DUOPOLY);
    for cmd in ["solve", "oracle"] {
        let a = ws.run(&[cmd, "--scenario", s(&sc), "--no-timestamp", "--sequential"]);
        let b = ws.run(&[cmd, "--scenario", s(&sc), "--no-timestamp"]);
        assert_eq!(a.code, EXIT_OK);
        assert_eq!(a.stdout, b.stdout, "{cmd}");
    }
}

#[test]
fn out_flag_writes_report_and_prints_table() {
    let ws = Workspace::new();
    let sc = ws.file("d.json", DUOPOLY);
    let out = ws.path("report.json");
    let r = ws.run(&[
        "oracle",
        "--scenario",
        s(&sc),
        "--grid",
        "0.05",
        "--out",
        s(&out),
    ]);
    assert_eq!(r.code, EXIT_OK, "{}", r.stderr);
    assert!(r.stdout.contains("grid profile(s) searched"));
    let rep: Value = serde_json::from_str(&fs::read_to_string(&out).unwrap()).unwrap();
    assert_eq!(rep["command"], "oracle");
    assert_eq!(rep["tool"]["name"], "ppm");
    assert_eq!(rep["result"]["profiles_searched"].as_f64(), Some(441.0));
    assert!(!rep["result"]["equilibria"].as_array().unwrap().is_empty());
}

#[test]
fn dynamics_on_several_segments() {
    let ws = Workspace::new();
    let sc = ws.file("t.json", TWO_SEGMENTS);
    let r = ws.run(&["dynamics", "--scenario", s(&sc), "--max-rounds", "50"]);
    assert_eq!(r.code, EXIT_OK, "{}", r.stderr);
    let rep = report(&r);
    assert_eq!(
        rep["result"]["rounds"][0]["updates"][0]["method"],
        "numeric-multi-start"
    );
    if rep["result"]["termination"] == "converged" {
        assert_eq!(
            rep["result"]["final_verification"]["is_epsilon_nash"],
            Value::Bool(true)
        );
    }
}

#[test]
fn dynamics_from_a_profile_file() {
    let ws = Workspace::new();
    let sc = ws.file("d.json", DUOPOLY);
    let p = ws.file(
        "p.json",
        r#"{ "strategies": { "north": { "basic": 0.3, "premium": 0.7 }, "south": { "lite": 1.0 } } }"#,
    );
    let r = ws.run(&["dynamics", "--scenario", s(&sc), "--init", s(&p)]);
    assert_eq!(r.code, EXIT_OK, "{}", r.stderr);
    let rep = report(&r);
    assert_eq!(rep["result"]["initial"]["south"]["pro"].as_f64(), Some(0.0));
    assert_eq!(rep["result"]["termination"], "converged");
}

#[test]
fn convert_both_directions() {
    let ws = Workspace::new();
    let sc = ws.file("d.json", DUOPOLY);
    let hat = ws.file(
        "hat.json",
        r#"[{ "products": ["basic", "premium"], "mass": 1.0 }]"#,
    );
    let r = ws.run(&[
        "convert",
        "--scenario",
        s(&sc),
        "--firm",
        "north",
        "--portfolio-dist",
        s(&hat),
    ]);
    assert_eq!(r.code, EXIT_OK, "{}", r.stderr);
    let rep = report(&r);
    assert_eq!(
        rep["result"]["product_distribution"]["basic"].as_f64(),
        Some(0.5)
    );
    assert_eq!(
        rep["result"]["product_distribution"]["premium"].as_f64(),
        Some(0.5)
    );

    let sigma = ws.file("sigma.json", r#"{ "basic": 0.5, "premium": 0.5 }"#);
    let r = ws.run(&[
        "convert",
        "--scenario",
        s(&sc),
        "--firm",
        "north",
        "--product-dist",
        s(&sigma),
    ]);
    assert_eq!(r.code, EXIT_OK, "{}", r.stderr);
    let masses: Vec<f64> = report(&r)["result"]["portfolio_distribution"]
        .as_array()
        .unwrap()
        .iter()
        .map(|p| p["mass"].as_f64().unwrap())
        .collect();
    assert_eq!(masses, vec![0.25, 0.25, 0.5]);

    let bad = ws.file("bad.json", r#"{ "basic": 0.5, "lite": 0.5 }"#);
    let r = ws.run(&[
        "convert",
        "--scenario",
        s(&sc),
        "--firm",
        "north",
        "--product-dist",
        s(&bad),
    ]);
    assert_eq!(r.code, EXIT_INVALID);
    assert!(r.stderr.contains("lite"));
}

#[test]
fn usage_and_input_errors() {
    let ws = Workspace::new();
    let sc = ws.file("d.json", DUOPOLY);

    let r = ws.run(&["solve", "--scenario", s(&sc), "--frobnicate"]);
    assert_eq!(r.code, EXIT_INVALID);
    assert!(r.stderr.contains("--frobnicate"));

    let r = ws.run(&["verify", "--profile", "p.json"]);
    assert_eq!(r.code, EXIT_INVALID);
    assert!(r.stderr.contains("--scenario"));

    let r = ws.run(&[
        "eval",
        "--scenario",
        s(&ws.path("missing.json")),
        "--profile",
        "p.json",
    ]);
    assert_eq!(r.code, EXIT_INVALID);
    assert!(r.stderr.contains("cannot read"));

    let broken = ws.file("broken.json", "{\n  \"segments\": [\n    { \"id\": \"s\", \"demand\": \"lots\" }\n  ],\n  \"firms\": []\n}");
    let r = ws.run(&["oracle", "--scenario", s(&broken)]);
    assert_eq!(r.code, EXIT_INVALID);
    assert!(r.stderr.contains("broken.json:3:"), "{}", r.stderr);

    let negative = ws.file(
        "neg.json",
        &DUOPOLY.replace("\"demand\": 500", "\"demand\": -1"),
    );
    let r = ws.run(&["oracle", "--scenario", s(&negative)]);
    assert_eq!(r.code, EXIT_INVALID);
    assert!(r.stderr.contains("`market`"), "{}", r.stderr);

    let r = ws.run(&["oracle", "--scenario", s(&sc), "--grid", "0.3"]);
    assert_eq!(r.code, EXIT_INVALID);

    let p = ws.file(
        "p.json",
        r#"{ "strategies": { "north": { "basic": 0.6 }, "south": { "lite": 1.0 } } }"#,
    );
    let r = ws.run(&["verify", "--scenario", s(&sc), "--profile", s(&p)]);
    assert_eq!(r.code, EXIT_INVALID);
    assert!(r.stderr.contains("north"));

    let r = ws.run(&[
        "eval",
        "--scenario",
        s(&sc),
        "--profile",
        s(&p),
        "--out",
        s(&ws.path("no/such/dir.json")),
    ]);
    assert_eq!(r.code, EXIT_INVALID, "profile errors come first");

    let good = ws.file(
        "g.json",
        r#"{ "strategies": { "north": { "basic": 1.0 }, "south": { "lite": 1.0 } } }"#,
    );
    let r = ws.run(&[
        "eval",
        "--scenario",
        s(&sc),
        "--profile",
        s(&good),
        "--out",
        s(&ws.path("no/such/dir.json")),
    ]);
    assert_eq!(r.code, EXIT_INTERNAL);

    let r = ws.run(&["--version"]);
    assert_eq!(r.code, EXIT_OK);
    assert!(r.stdout.starts_with("ppm "));
}
