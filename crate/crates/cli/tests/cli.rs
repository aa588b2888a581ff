use std::process::{Command, Output};

use serde_json::Value;

fn flowcx(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_flowcx"))
        .args(args)
        .output()
        .expect("binary runs")
}

fn json(args: &[&str]) -> Value {
    let out = flowcx(args);
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    serde_json::from_slice(&out.stdout).expect("json output")
}

fn complex(v: &Value) -> (f64, f64) {
    (v[0].as_f64().unwrap(), v[1].as_f64().unwrap())
}

#[test]
fn analyze_reports_family_bounds() {
    let r = json(&["analyze", "--family", "u1, 2*u1, u2"]);
    assert_eq!(r["schema"], 1);
    assert_eq!(r["command"], "analyze");
    assert_eq!(r["result"]["family_bound"], 1);

    let r = json(&["analyze", "--family", "t, t^2"]);
    assert_eq!(r["result"]["family_bound"], 0);
    assert_eq!(r["result"]["exact"], true);
    assert_eq!(r["result"]["complexity_zero"], true);

    let r = json(&["analyze", "--family", "t, 2t, t^2"]);
    assert_eq!(r["result"]["family_bound"], 1);
    assert_eq!(r["result"]["linearization"], serde_json::json!(["u1", "2*u1", "u2"]));
}

#[test]
fn usage_errors_exit_with_two() {
    assert_eq!(flowcx(&["analyze", "--family", "t, ("]).status.code(), Some(2));
    assert_eq!(flowcx(&["analyze", "--bogus"]).status.code(), Some(2));
    assert_eq!(flowcx(&["simulate", "--family", "s"]).status.code(), Some(2));
    assert_eq!(flowcx(&["analyze", "--family", "t, t+1"]).status.code(), Some(2));
}

#[test]
fn help_lists_flags() {
    let out = flowcx(&["simulate", "--help"]);
    let text = String::from_utf8_lossy(&out.stdout);
    for flag in ["--family", "--flow", "--gamma", "--alpha", "--beta", "--zeta", "--observables", "--R", "--scheme", "--samples", "--seed", "--out", "--format", "--strict"] {
        assert!(text.contains(flag), "missing {flag}");
    }
    let out = flowcx(&["returns", "--help"]);
    let text = String::from_utf8_lossy(&out.stdout);
    for flag in ["--delta", "--epsilon", "--smax", "--step", "--intervals"] {
        assert!(text.contains(flag), "missing {flag}");
    }
}

#[test]
fn constant_observables_give_the_exact_product() {
    let r = json(&["simulate", "--family", "s, s^2", "--gamma", "sqrt2", "--observables", "const:0.5; const:3"]);
    assert_eq!(complex(&r["result"]["value"]), (1.5, 0.0));
    assert_eq!(r["result"]["stderr"], 0.0);
}

#[test]
fn opposite_times_on_a_diagonal_flow() {
    let (x1, x2) = (0.1, 0.35);
    let c = 0.25;
    let r = json(&[
        "kronecker",
        "--family",
        "s, -s + 1/4",
        "--gamma",
        "1, 1",
        "--observables",
        "char:1,0; char:0,1",
        "--x",
        "0.1, 0.35",
    ]);
    assert_eq!(r["result"]["mode"], "direction");
    let (re, im) = complex(&r["result"]["value"]);
    let arg = std::f64::consts::TAU * (x1 + x2 + c);
    assert!((re - arg.cos()).abs() < 1e-12 && (im - arg.sin()).abs() < 1e-12);
}

#[test]
fn large_epsilon_makes_every_point_good() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("e.txt");
    std::fs::write(&path, "period=1\n0,0.3\n").unwrap();
    let r = json(&[
        "returns",
        "--family",
        "t, 2t",
        "--intervals",
        path.to_str().unwrap(),
        "--delta",
        "0.05",
        "--epsilon",
        "1",
        "--smax",
        "5",
        "--step",
        "0.1",
    ]);
    let scan = &r["result"]["scan"];
    assert_eq!(scan["good_points"], scan["grid_points"]);
    assert_eq!(scan["max_gap_exact"], "1/10");
}

#[test]
fn strict_turns_failed_gates_into_exit_one() {
    let args = ["equidist", "--family", "s, 2s", "--R", "100", "--samples", "1000"];
    assert_eq!(flowcx(&args).status.code(), Some(0));
    let mut strict = args.to_vec();
    strict.push("--strict");
    assert_eq!(flowcx(&strict).status.code(), Some(1));
}

#[test]
fn runs_are_reproducible_from_their_config() {
    let args = ["simulate", "--family", "s, s^2", "--gamma", "sqrt2", "--observables", "char:1; char:1", "--x", "0.3", "--samples", "20000", "--seed", "7"];
    let a = flowcx(&args);
    let b = flowcx(&args);
    assert_eq!(a.stdout, b.stdout);

    let first: Value = serde_json::from_slice(&a.stdout).unwrap();
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("run.json");
    std::fs::write(&cfg, first["config"].to_string()).unwrap();
    let again = json(&["simulate", "--config", cfg.to_str().unwrap()]);
    assert_eq!(again["result"], first["result"]);
    assert_eq!(again["config"], first["config"]);
}

#[test]
fn csv_output_embeds_config_and_version() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("r.csv");
    let status = flowcx(&["analyze", "--family", "t, t^2", "--format", "csv", "--out", out.to_str().unwrap()]);
    assert!(status.status.success());
    let text = std::fs::read_to_string(out).unwrap();
    assert!(text.contains("# version: "));
    assert!(text.contains("# config: {"));
    assert!(text.contains("j,bound,rule"));
}
