use super::*;

#[test]
fn registry_names_are_unique_and_findable() {
    let names: Vec<&str> = registry().iter().map(|s| s.name).collect();
    let mut sorted = names.clone();
    sorted.sort();
    sorted.dedup();
    assert_eq!(sorted.len(), names.len());
    for n in names {
        assert_eq!(find(n).unwrap().name, n);
    }
    assert!(matches!(find("nope"), Err(Error::UnknownScenario(_))));
}

#[test]
fn close_uses_relative_error_above_one() {
    let mut r = ScenarioResult::new("t");
    r.expect_close("a", 1000.0 + 1e-7, 1000.0, 1e-9);
    r.expect_close("b", 1e-3, 0.0, 1e-2);
    r.expect_close("c", 1.1, 1.0, 1e-2);
    assert!(r.check("a").unwrap().passed);
    assert!(r.check("b").unwrap().passed);
    assert!(!r.check("c").unwrap().passed);
}

#[test]
fn non_finite_outcome_fails_the_scenario() {
    let mut r = ScenarioResult::new("t");
    r.put("x", f64::INFINITY);
    r.expect("ok", true, "");
    let r = r.finish();
    assert!(!r.passed);
    let json = serde_json::to_string(&r).unwrap();
    assert!(json.contains("\"x\":\"inf\""));
}

#[test]
fn epi_inf_conv_of_quadratics() {
    let q = |x: f64| 0.5 * x * x;
    let f1 = smooth1("q", q, |x| x);
    let u = epi_inf_conv(f1.clone(), f1, 2.0);
    // min_z ½(x−z)² + ¼z² = x²/6.
    for x in [-2.0, 0.0, 0.5, 3.0] {
        assert!((u.evaluate(&[x]) - x * x / 6.0).abs() < 1e-12);
        assert!((u.smooth_gradient(&[x]).unwrap()[0] - x / 3.0).abs() < 1e-9);
    }
}

#[test]
fn random_piecewise_linear_is_continuous_and_coercive() {
    let mut rng = ChaCha8Rng::seed_from_u64(3);
    for _ in 0..50 {
        let g = random_piecewise_linear(&mut rng, 2..=5, 3.0, 2.0);
        assert!(g.slopes()[0] < 0.0 && *g.slopes().last().unwrap() > 0.0);
    }
}

#[test]
fn counterexample_functions_match_closed_forms() {
    let f = counter_rel_str_cvx_function();
    assert!((f.evaluate(&[-8.0, -1.0]) - 65.0).abs() < 1e-12);
    let g = counterex_weak_nd_function();
    assert!((g.evaluate(&[1.0, 0.0]) + 1.0).abs() < 1e-12);
}

#[test]
fn fast_scenarios_pass() {
    for name in ["counter_duality_bregman", "tilt_invariance_failure", "counterex_weak_nd"] {
        let r = run(name).unwrap();
        assert!(r.passed, "{name}: {:?}", r.failed_checks());
    }
}
