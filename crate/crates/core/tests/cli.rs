use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use serde_json::Value;

fn bin() -> Command {
    Command::new(env!("CARGO_BIN_EXE_aniso"))
}

fn repo() -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("../..")
}

fn run(args: &[&str]) -> Output {
    bin().args(args).output().expect("binary runs")
}

fn code(o: &Output) -> i32 {
    o.status.code().expect("exit code")
}

fn stdout_json(o: &Output) -> Value {
    serde_json::from_slice(&o.stdout).unwrap_or_else(|e| panic!("stdout is not JSON ({e}): {}", String::from_utf8_lossy(&o.stdout)))
}

fn validate(schema_file: &str, instance: &Value) {
    let dir = repo().join("schema");
    let load = |f: &str| -> Value { serde_json::from_str(&std::fs::read_to_string(dir.join(f)).unwrap()).unwrap() };
    let mut opts = jsonschema::options();
    for f in ["check_report.schema.json", "scenario_result.schema.json", "scenario_file.schema.json"] {
        let v = load(f);
        let id = v["$id"].as_str().unwrap().to_string();
        opts.with_resource(id, jsonschema::Resource::from_contents(v).unwrap());
    }
    let validator = opts.build(&load(schema_file)).expect("schema compiles");
    let errors: Vec<String> = validator.iter_errors(instance).map(|e| e.to_string()).collect();
    assert!(errors.is_empty(), "{schema_file}: {errors:?}");
}

#[test]
fn check_holds_exits_zero() {
    let o = run(&["check", "--f", "x1^2+x2^4+x1-2*x2", "--phi", "aniso_poly", "--class", "b-strong", "--plan", "grid:-2..2/21,-2..2/21"]);
    assert_eq!(code(&o), 0, "{}", String::from_utf8_lossy(&o.stderr));
    let r = stdout_json(&o);
    assert_eq!(r["verdict"], "holds");
    validate("check_report.schema.json", &r);
}

#[test]
fn scenario_file_reproduces_the_counterexample_witness() {
    let file = repo().join("scenarios/counter_rel_str_cvx.json");
    let text: Value = serde_json::from_str(&std::fs::read_to_string(&file).unwrap()).unwrap();
    validate("scenario_file.schema.json", &text);
    let o = run(&["check", "--scenario", file.to_str().unwrap()]);
    assert_eq!(code(&o), 2);
    let r = stdout_json(&o);
    validate("check_report.schema.json", &r);
    assert_eq!(r["verdict"], "violated");
    assert_eq!(r["witness"]["point"], serde_json::json!([-8.0, -1.0]));
    assert!(r["worst_margin"].as_f64().unwrap() <= -1.0);
}

#[test]
fn unknown_scenario_key_is_rejected() {
    let dir = tempfile::tempdir().unwrap();
    let p = dir.path().join("bad.json");
    std::fs::write(&p, r#"{"f":"x1^2","pair":{"name":"quadratic","params":[1]},"class":"b-weak","probes":{"kind":"grid","lower":[-1],"upper":[1],"counts":[3]},"typo":true}"#).unwrap();
    let o = run(&["check", "--scenario", p.to_str().unwrap()]);
    assert_eq!(code(&o), 1);
    assert!(String::from_utf8_lossy(&o.stderr).contains("typo"));
}

#[test]
fn malformed_expression_reports_byte_offset() {
    let o = run(&["check", "--f", "x1^2+*2", "--phi", "quadratic:1", "--class", "b-weak", "--plan", "grid:-1..1/5"]);
    assert_eq!(code(&o), 1);
    let err = String::from_utf8_lossy(&o.stderr);
    assert!(err.contains("byte 5"), "{err}");
}

#[test]
fn inconclusive_check_exits_three() {
    // abs has a kink on the anchor grid, which the a-smooth check cannot certify.
    let o = run(&["check", "--f", "abs(x1)", "--phi", "quadratic:1", "--class", "a-smooth", "--plan", "grid:-1..1/5", "--anchors", "points:0"]);
    assert_eq!(code(&o), 3, "{}", String::from_utf8_lossy(&o.stdout));
    assert_eq!(stdout_json(&o)["verdict"], "inconclusive");
}

#[test]
fn expression_can_come_from_a_file() {
    let dir = tempfile::tempdir().unwrap();
    let p = dir.path().join("f.txt");
    std::fs::write(&p, "0.5*x1^2\n").unwrap();
    let o = run(&["check", "--f", p.to_str().unwrap(), "--phi", "quadratic:1", "--class", "b-smooth", "--plan", "grid:-2..2/9"]);
    assert_eq!(code(&o), 0);
}

#[test]
fn conjugate_of_half_square_is_self_conjugate() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("c.csv");
    let o = run(&["conjugate", "--f", "0.5*x1^2", "--primal-plan", "grid:-4..4/81", "--dual-plan", "grid:-2..2/21", "--out", out.to_str().unwrap()]);
    assert_eq!(code(&o), 0);
    let s = stdout_json(&o);
    validate("conjugate_summary.schema.json", &s);
    assert_eq!(s["boundary"], false);
    let csv = std::fs::read_to_string(&out).unwrap();
    let mut lines = csv.lines();
    assert_eq!(lines.next(), Some("x,value"));
    for line in lines {
        let v: Vec<f64> = line.split(',').map(|t| t.parse().unwrap()).collect();
        assert!((v[1] - 0.5 * v[0] * v[0]).abs() < 1e-12, "{line}");
    }
    assert!(!csv.contains('\r'));
}

#[test]
fn conjugate_of_tilted_cubic_matches_shifted_reference_conjugate() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("c.csv");
    let o = run(&["conjugate", "--f", "abs(x1)^3/3 + x1", "--primal-plan", "grid:-4..4/8001", "--dual-plan", "grid:-3..3/13", "--out", out.to_str().unwrap()]);
    assert_eq!(code(&o), 0);
    for line in std::fs::read_to_string(&out).unwrap().lines().skip(1) {
        let v: Vec<f64> = line.split(',').map(|t| t.parse().unwrap()).collect();
        let want = (2.0 / 3.0) * (v[0] - 1.0).abs().powf(1.5);
        // Grid step 1e-3: the loss is at most max|f''|·(h/2)²/2 on [-4, 4].
        assert!((v[1] - want).abs() <= 8.0 * 0.0005f64.powi(2) / 2.0 + 1e-12, "{line}");
    }
}

#[test]
fn conjugate_flags_boundary_attainment() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("c.csv");
    let o = run(&["conjugate", "--f", "0.5*x1^2", "--primal-plan", "grid:-1..1/21", "--dual-plan", "grid:-3..3/7", "--out", out.to_str().unwrap()]);
    assert_eq!(code(&o), 0);
    let s = stdout_json(&o);
    assert_eq!(s["boundary"], true);
    assert!(s["boundary_hits"].as_u64().unwrap() > 0);
}

#[test]
fn conjugate_of_quartic_residual_on_line_points() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("c.csv");
    let o = run(&[
        "conjugate", "--f", "0.25*(x1 - x2 - 5)^4", "--primal-plan", "grid:-3..3/101,-3..3/101", "--dual-plan", "points:0.5,-0.5;1,-1", "--out",
        out.to_str().unwrap(),
    ]);
    assert_eq!(code(&o), 0);
    let csv = std::fs::read_to_string(&out).unwrap();
    let rows: Vec<Vec<f64>> = csv.lines().skip(1).map(|l| l.split(',').map(|t| t.parse().unwrap()).collect()).collect();
    for r in rows {
        let t: f64 = r[0];
        // Brute force over the same grid.
        let mut best = f64::NEG_INFINITY;
        for i in 0..101 {
            for j in 0..101 {
                let (a, b) = (-3.0 + 0.06 * i as f64, -3.0 + 0.06 * j as f64);
                best = best.max(t * a - t * b - 0.25 * (a - b - 5.0).powi(4));
            }
        }
        assert!((r[2] - best).abs() < 1e-9, "{r:?} vs {best}");
        assert!(r[2] <= 5.0 * t + 0.75 * t.abs().powf(4.0 / 3.0) + 1e-12);
    }
}

#[test]
fn envelope_writes_csv() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("e.csv");
    let o = run(&["envelope", "--g", "abs(x1)", "--phi", "quadratic:1", "--plan", "grid:-4..4/801", "--eval-plan", "grid:-2..2/5", "--out", out.to_str().unwrap()]);
    assert_eq!(code(&o), 0);
    let csv = std::fs::read_to_string(&out).unwrap();
    // Huber function: x²/2 for |x| ≤ 1, |x| − 1/2 beyond.
    for line in csv.lines().skip(1) {
        let v: Vec<f64> = line.split(',').map(|t| t.parse().unwrap()).collect();
        let want = if v[0].abs() <= 1.0 { 0.5 * v[0] * v[0] } else { v[0].abs() - 0.5 };
        assert!((v[1] - want).abs() < 1e-9, "{line}");
    }
}

#[test]
fn descend_exit_codes() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("d.csv");
    let outp = out.to_str().unwrap();
    let o = run(&["descend", "--f", "0.5*x1^2", "--phi", "quadratic:1", "--x0", "7", "--out", outp]);
    assert_eq!(code(&o), 0);
    let s = stdout_json(&o);
    validate("descend_summary.schema.json", &s);
    assert_eq!(s["iterations"], 1);
    let csv = std::fs::read_to_string(&out).unwrap();
    assert!(csv.starts_with("iter,x,value,gradient_norm,residual\n"));
    let rows: Vec<&str> = csv.lines().skip(1).collect();
    assert_eq!(rows.len(), 2);
    assert!(rows[0].starts_with("0,7.0000000000000000e0,") && rows[1].starts_with("1,"), "{csv}");

    let o = run(&["descend", "--f", "log(exp(x1)+exp(-x1))", "--phi", "quadratic:1", "--x0", "3", "--max-iter", "3", "--out", outp]);
    assert_eq!(code(&o), 4);

    // f = 3φ overshoots: xₜ₊₁ = −2xₜ.
    let o = run(&["descend", "--f", "1.5*x1^2", "--phi", "quadratic:1", "--x0", "1", "--out", outp]);
    assert_eq!(code(&o), 5);
    assert_eq!(stdout_json(&o)["status"], "diverged");

    let o = run(&["descend", "--f", "x1*x2", "--phi", "quadratic:1", "--x0", "1", "--out", outp]);
    assert_eq!(code(&o), 1);
}

#[test]
fn descend_without_out_streams_csv() {
    let o = run(&["descend", "--f", "0.5*(x1^2 + x2^2)", "--phi", "quadratic:1", "--x0", "-3,4"]);
    assert_eq!(code(&o), 0);
    let text = String::from_utf8(o.stdout).unwrap();
    assert!(text.starts_with("iter,x1,x2,value,gradient_norm,residual\n"));
}

#[test]
fn scenario_writes_json_and_figure_csv() {
    let dir = tempfile::tempdir().unwrap();
    let o = run(&["scenario", "--name", "counter_rel_str_cvx", "--out-dir", dir.path().to_str().unwrap()]);
    assert_eq!(code(&o), 0, "{}", String::from_utf8_lossy(&o.stdout));
    let json: Value = serde_json::from_str(&std::fs::read_to_string(dir.path().join("counter_rel_str_cvx.json")).unwrap()).unwrap();
    validate("scenario_result.schema.json", &json);
    assert_eq!(json["passed"], true);
    let csv = std::fs::read_to_string(dir.path().join("counter_rel_str_cvx_line.csv")).unwrap();
    assert!(csv.starts_with("t,f,bound\n"));
    assert_eq!(csv.lines().count(), 112);
}

#[test]
fn scenario_failure_exits_two_and_names_it() {
    let dir = tempfile::tempdir().unwrap();
    let o = run(&["scenario", "--name", "a_strongly_cvx", "--out-dir", dir.path().to_str().unwrap()]);
    assert_eq!(code(&o), 2);
    assert!(String::from_utf8_lossy(&o.stderr).contains("a_strongly_cvx"));
    let json: Value = serde_json::from_str(&std::fs::read_to_string(dir.path().join("a_strongly_cvx.json")).unwrap()).unwrap();
    validate("scenario_result.schema.json", &json);
}

#[test]
fn unknown_scenario_exits_one() {
    let o = run(&["scenario", "--name", "nope"]);
    assert_eq!(code(&o), 1);
}

#[test]
fn identical_invocations_are_byte_identical() {
    let a = tempfile::tempdir().unwrap();
    let b = tempfile::tempdir().unwrap();
    for d in [&a, &b] {
        let o = run(&["--jobs", "1", "scenario", "--name", "univariate_max_property", "--name", "counterex_weak_nd", "--out-dir", d.path().to_str().unwrap()]);
        assert_eq!(code(&o), 0, "{}", String::from_utf8_lossy(&o.stdout));
    }
    let mut names: Vec<_> = std::fs::read_dir(a.path()).unwrap().map(|e| e.unwrap().file_name()).collect();
    names.sort();
    assert!(names.len() >= 4);
    for n in names {
        assert_eq!(std::fs::read(a.path().join(&n)).unwrap(), std::fs::read(b.path().join(&n)).unwrap(), "{n:?}");
    }
    let r1 = run(&["check", "--f", "x1^4", "--phi", "cubic_abs", "--class", "a-smooth", "--plan", "random:-2..2/200/9"]);
    let r2 = run(&["--jobs", "2", "check", "--f", "x1^4", "--phi", "cubic_abs", "--class", "a-smooth", "--plan", "random:-2..2/200/9"]);
    assert_eq!(r1.stdout, r2.stdout);
}

#[test]
fn list_prints_registry_and_catalog() {
    let o = run(&["list", "--json"]);
    assert_eq!(code(&o), 0);
    let v = stdout_json(&o);
    let names: Vec<&str> = v["scenarios"].as_array().unwrap().iter().map(|s| s["name"].as_str().unwrap()).collect();
    assert!(names.contains(&"counter_rel_str_cvx"));
    assert!(v["pairs"].as_array().unwrap().iter().any(|p| p == "cubic_abs"));
}

#[test]
fn missing_subcommand_is_a_usage_error() {
    assert_eq!(code(&run(&[])), 1);
    assert_eq!(code(&run(&["check", "--phi", "quadratic:1"])), 1);
}
