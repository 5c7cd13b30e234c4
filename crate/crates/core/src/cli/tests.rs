use super::*;
use crate::sampling::SamplingPlan;

#[test]
fn grid_plan_syntax() {
    let p = parse_plan("grid:-3..3/7,0..1/2", 0).unwrap();
    assert_eq!(p, SamplingPlan::grid(vec![-3.0, 0.0], vec![3.0, 1.0], vec![7, 2]).unwrap());
}

#[test]
fn random_plan_takes_default_seed() {
    let p = parse_plan("random:-1..1/10", 42).unwrap();
    assert_eq!(p, SamplingPlan::random(vec![-1.0], vec![1.0], 10, 42).unwrap());
    let q = parse_plan("random:-1..1,0..2/10/5", 42).unwrap();
    assert_eq!(q, SamplingPlan::random(vec![-1.0, 0.0], vec![1.0, 2.0], 10, 5).unwrap());
}

#[test]
fn points_and_json_plans() {
    let p = parse_plan("points:-8,-1;0,0", 0).unwrap();
    assert_eq!(p.points_vec(), vec![vec![-8.0, -1.0], vec![0.0, 0.0]]);
    let j = parse_plan(r#"{"kind":"grid","lower":[0],"upper":[1],"counts":[3]}"#, 0).unwrap();
    assert_eq!(j, SamplingPlan::grid1(0.0, 1.0, 3));
}

#[test]
fn bad_plans_are_config_errors() {
    for s in ["grid:0..1", "grid:1..0/3", "random:0..1", "cube:0..1/3", "points:1,x", "grid:0..1/3/4"] {
        assert!(parse_plan(s, 0).is_err(), "{s}");
    }
}

#[test]
fn policies() {
    assert_eq!(parse_policy("hull:11").unwrap(), SubgradientPolicy::HullGrid { count: 11 });
    assert_eq!(parse_policy("vertices").unwrap(), SubgradientPolicy::Vertices);
    assert!(parse_policy("hull:x").is_err());
}

#[test]
fn scenario_file_rejects_unknown_keys_and_sign_mismatch() {
    let base = r#"{"f":"x1^2","pair":{"name":"quadratic","params":[1]},"class":"b-strong","probes":{"kind":"grid","lower":[-1],"upper":[1],"counts":[5]}"#;
    assert!(ScenarioFile::from_json(&format!("{base}}}")).is_ok());
    assert!(ScenarioFile::from_json(&format!("{base},\"extra\":1}}")).is_err());
    assert!(ScenarioFile::from_json(&format!("{base},\"r\":-1}}")).is_err());
    assert!(ScenarioFile::from_json(&format!("{base},\"r\":1}}")).is_ok());
}

#[test]
fn check_runs_from_a_scenario_file() {
    let text = r#"{"f":"0.5*x1^2","pair":{"name":"quadratic","params":[1]},"class":"b-smooth","probes":{"kind":"grid","lower":[-2],"upper":[2],"counts":[41]}}"#;
    let report = run_check(&ScenarioFile::from_json(text).unwrap()).unwrap();
    assert!(report.holds());
}

#[test]
fn expression_arity_is_checked_against_plan() {
    assert!(matches!(parse_function("x1 + x3", 2), Err(Error::Dimension { .. })));
    assert_eq!(parse_function("x1", 2).unwrap().arity(), 2);
}
