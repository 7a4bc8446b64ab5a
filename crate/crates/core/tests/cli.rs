use std::path::{Path, PathBuf};
use std::process::Command;

use serde_json::{json, Value};
use tempfile::TempDir;

fn write(dir: &Path, name: &str, v: &Value) -> PathBuf {
    let p = dir.join(name);
    std::fs::write(&p, serde_json::to_string(v).unwrap()).unwrap();
    p
}

fn run(args: &[&str]) -> (i32, String) {
    let out = Command::new(env!("CARGO_BIN_EXE_dpkit")).args(args).output().unwrap();
    (out.status.code().unwrap(), String::from_utf8(out.stdout).unwrap())
}

fn run_cfg(cmd: &str, cfg: &Path, extra: &[&str]) -> (i32, String) {
    let mut args = vec![cmd, "--config", cfg.to_str().unwrap()];
    args.extend_from_slice(extra);
    run(&args)
}

fn laplace_mech(eps: f64) -> Value {
    json!({"kind": "laplace", "queries": {"n": 3, "queries": [[0], [0, 1], [2]]}, "epsilon": eps})
}

#[test]
fn sample_is_deterministic_jsonl_with_seed_header() {
    let dir = TempDir::new().unwrap();
    write(dir.path(), "d.json", &json!({"histogram": [1, 0, 2]}));
    let cfg = write(dir.path(), "s.json", &json!({"mechanism": laplace_mech(1.0), "dataset": "d.json"}));
    let (code, a) = run_cfg("sample", &cfg, &["--samples", "3", "--seed", "9"]);
    assert_eq!(code, 0);
    let (_, b) = run_cfg("sample", &cfg, &["--samples", "3", "--seed", "9"]);
    assert_eq!(a, b);
    let lines: Vec<Value> = a.lines().map(|l| serde_json::from_str(l).unwrap()).collect();
    assert_eq!(lines.len(), 4);
    assert_eq!(lines[0]["seed"], 9);
    assert!(lines[1..].iter().all(|l| l.as_array().unwrap().len() == 3));
}

#[test]
fn sample_single_query_rnm_always_reports_zero() {
    let dir = TempDir::new().unwrap();
    let mech = json!({"kind": "rnm", "queries": {"n": 2, "queries": [[1]]}, "epsilon": 1.0});
    let cfg = write(dir.path(), "s.json", &json!({"mechanism": mech, "dataset": {"histogram": [4, 1]}}));
    let (code, out) = run_cfg("sample", &cfg, &["--samples", "50"]);
    assert_eq!(code, 0);
    assert!(out.lines().skip(1).all(|l| l == "0"));
}

#[test]
fn sample_missing_dataset_is_config_error() {
    let dir = TempDir::new().unwrap();
    let cfg = write(dir.path(), "s.json", &json!({"mechanism": laplace_mech(1.0), "dataset": "absent.json"}));
    assert_eq!(run_cfg("sample", &cfg, &[]).0, 2);
    assert_eq!(run(&["sample", "--config", "/nonexistent/config.json"]).0, 2);
    assert_eq!(run(&["no-such-command"]).0, 2);
}

#[test]
fn divergence_method_selection() {
    let dir = TempDir::new().unwrap();
    let t = json!({"kind": "discrete", "table": {"a": 0.25, "b": 0.75}});
    let cfg = write(dir.path(), "d1.json", &json!({"epsilon": 0.0, "mu": t, "nu": t}));
    let (code, out) = run_cfg("divergence", &cfg, &[]);
    assert_eq!(code, 0);
    let r: Value = serde_json::from_str(&out).unwrap();
    assert_eq!(r["result"]["method"], "exact-discrete");
    assert_eq!(r["result"]["value"], 0.0);

    let lap = |loc: f64| json!({"kind": "laplace", "scale": 1.0, "location": loc});
    let cfg = write(dir.path(), "d2.json", &json!({"epsilon": 1.0, "mu": lap(0.0), "nu": lap(1.0)}));
    let r: Value = serde_json::from_str(&run_cfg("divergence", &cfg, &[]).1).unwrap();
    assert_eq!(r["result"]["method"], "quadrature");
    assert!(r["result"]["value"].as_f64().unwrap() <= 1e-9);

    let s = |loc: f64| json!({"kind": "sampler", "of": lap(loc)});
    let cfg = write(dir.path(), "d3.json", &json!({"epsilon": 1.0, "mu": s(0.0), "nu": s(1.0)}));
    let r: Value = serde_json::from_str(&run_cfg("divergence", &cfg, &["--samples", "20000"]).1).unwrap();
    assert_eq!(r["result"]["method"], "monte-carlo");
    assert!(r["result"]["error_bound"].as_f64().unwrap() > 0.0);

    let cfg = write(dir.path(), "d4.json", &json!({"epsilon": 1.0, "mu": t, "nu": lap(0.0)}));
    assert_eq!(run_cfg("divergence", &cfg, &[]).0, 2);
    let cfg = write(dir.path(), "d5.json", &json!({"epsilon": 1.0, "mu": lap(0.0), "nu": lap(1.0)}));
    assert_eq!(run_cfg("divergence", &cfg, &["--method", "exact"]).0, 2);
    let r: Value = serde_json::from_str(&run_cfg("divergence", &cfg, &["--method", "monte-carlo"]).1).unwrap();
    assert_eq!(r["result"]["method"], "monte-carlo");
}

fn audit_cfg(mech: Value, eps: f64) -> Value {
    json!({"mechanism": mech, "budget": {"epsilon": eps}, "adjacency": {"max_entry": 2}})
}

#[test]
fn audit_exit_codes() {
    let dir = TempDir::new().unwrap();
    let cfg = write(dir.path(), "a1.json", &audit_cfg(laplace_mech(1.0), 1.0));
    assert_eq!(run_cfg("audit", &cfg, &[]).0, 0);

    let cfg = write(dir.path(), "a2.json", &audit_cfg(laplace_mech(1.0), 0.25));
    let (code, out) = run_cfg("audit", &cfg, &[]);
    assert_eq!(code, 1);
    let r: Value = serde_json::from_str(&out).unwrap();
    assert_eq!(r["verdict"], "violation");
    assert!(r["result"]["witness"]["gap"].as_f64().unwrap() > 0.0);

    let buggy = json!({"kind": "rnm", "variant": "first-only",
        "queries": {"n": 3, "queries": [[0], [1], [2]]}, "epsilon": 1.0});
    let cfg = write(dir.path(), "a3.json", &audit_cfg(buggy, 1.0));
    let (code, out) = run_cfg("audit", &cfg, &[]);
    assert_eq!(code, 1);
    let r: Value = serde_json::from_str(&out).unwrap();
    assert!(r["result"]["witness"].is_object());

    let cfg = write(dir.path(), "a4.json", &json!({"mechanism": laplace_mech(1.0), "budget": {"epsilon": 1.0}}));
    assert_eq!(run_cfg("audit", &cfg, &[]).0, 2);
}

#[test]
fn audit_statistical_never_claims_verification() {
    let dir = TempDir::new().unwrap();
    let rr = json!({"kind": "randomized-response", "n": 2, "predicate": [0], "threshold": 1, "flip_prob": 0.25});
    let cfg = write(dir.path(), "a.json", &audit_cfg(rr, 3f64.ln()));
    let (code, out) = run_cfg("audit", &cfg, &["--method", "monte-carlo", "--samples", "20000"]);
    let r: Value = serde_json::from_str(&out).unwrap();
    assert!(code == 0 || code == 3);
    assert_ne!(r["verdict"], "pass");
}

#[test]
fn audit_composed_mechanism() {
    let dir = TempDir::new().unwrap();
    let rr = json!({"kind": "randomized-response", "n": 2, "predicate": [0], "threshold": 1, "flip_prob": 0.25});
    let rnm = json!({"kind": "rnm", "queries": {"n": 2, "queries": [[0], [1]]}, "epsilon": 0.5});
    let composed = json!({"kind": "composed", "first": rr, "second": rnm});
    let cfg = write(dir.path(), "a.json", &audit_cfg(composed.clone(), 3f64.ln() + 0.5));
    assert_eq!(run_cfg("audit", &cfg, &[]).0, 0);
    let cfg = write(dir.path(), "b.json", &audit_cfg(composed, 3f64.ln()));
    assert_eq!(run_cfg("audit", &cfg, &[]).0, 1);
}

#[test]
fn rnm_verify_defaults_and_validation() {
    let (code, out) = run(&["rnm-verify"]);
    assert_eq!(code, 0);
    let r: Value = serde_json::from_str(&out).unwrap();
    let e = std::f64::consts::E;
    assert!(r["max_ratio"].as_f64().unwrap() <= e);
    assert!(r["naive_bound"].as_f64().unwrap() > r["finer_bound"].as_f64().unwrap());
    assert_eq!(run(&["rnm-verify", "--tol", "0"]).0, 2);
}

#[test]
fn accountant_folds_trees() {
    let dir = TempDir::new().unwrap();
    let b = |e: f64| json!({"budget": {"epsilon": e, "delta": 0.0}});
    let cases = [
        (json!({"seq": [b(1.0), b(2.0)]}), Some(3.0)),
        (json!({"group": {"k": 4, "of": b(0.25)}}), Some(1.0)),
        (json!({"weaken": {"epsilon": 0.5, "delta": 0.0, "of": b(1.0)}}), None),
        (
            json!({"group": {"k": 2, "of": {"budget": {"epsilon": 0.5, "delta": 0.1}}}}),
            None,
        ),
    ];
    for (i, (tree, expect)) in cases.into_iter().enumerate() {
        let cfg = write(dir.path(), &format!("t{i}.json"), &tree);
        let (code, out) = run_cfg("accountant", &cfg, &[]);
        match expect {
            Some(eps) => {
                assert_eq!(code, 0);
                let r: Value = serde_json::from_str(&out).unwrap();
                assert_eq!(r["total"]["epsilon"], eps);
                assert_eq!(r["total"]["delta"], 0.0);
            }
            None => assert_eq!(code, 2),
        }
    }
}

#[test]
fn out_flag_writes_file() {
    let dir = TempDir::new().unwrap();
    let cfg = write(dir.path(), "t.json", &json!({"post": {"budget": {"epsilon": 1.0, "delta": 0.0}}}));
    let out = dir.path().join("report.json");
    let (code, stdout) = run_cfg("accountant", &cfg, &["--out", out.to_str().unwrap()]);
    assert_eq!(code, 0);
    assert!(stdout.is_empty());
    let r: Value = serde_json::from_str(&std::fs::read_to_string(out).unwrap()).unwrap();
    assert_eq!(r["total"]["epsilon"], 1.0);
}
