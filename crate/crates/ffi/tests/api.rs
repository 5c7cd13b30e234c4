use std::ffi::{CStr, CString};
use std::ptr;

use aniso_ffi::*;

fn cs(s: &str) -> CString {
    CString::new(s).unwrap()
}

fn last_error() -> String {
    unsafe { CStr::from_ptr(aniso_last_error()) }.to_str().unwrap().to_owned()
}

fn function(src: &str, arity: usize) -> *mut AnisoFunction {
    let mut f = ptr::null_mut();
    assert_eq!(unsafe { aniso_function_parse(cs(src).as_ptr(), arity, &mut f) }, AnisoStatus::Ok, "{}", last_error());
    f
}

fn pair(spec: &str, dim: usize) -> *mut AnisoPair {
    let mut p = ptr::null_mut();
    assert_eq!(unsafe { aniso_pair_new(cs(spec).as_ptr(), dim, &mut p) }, AnisoStatus::Ok, "{}", last_error());
    p
}

#[test]
fn version_is_crate_version() {
    let v = unsafe { CStr::from_ptr(aniso_version()) }.to_str().unwrap();
    assert_eq!(v, env!("CARGO_PKG_VERSION"));
}

#[test]
fn function_eval_and_gradient() {
    let f = function("x1^2 + 3*x1*x2", 0);
    unsafe {
        assert_eq!(aniso_function_arity(f), 2);
        let mut v = 0.0;
        assert_eq!(aniso_function_eval(f, [2.0, 1.0].as_ptr(), 2, &mut v), AnisoStatus::Ok);
        assert_eq!(v, 10.0);
        let mut g = [0.0; 2];
        assert_eq!(aniso_function_gradient(f, [2.0, 1.0].as_ptr(), 2, g.as_mut_ptr()), AnisoStatus::Ok);
        assert_eq!(g, [7.0, 6.0]);
        assert_eq!(aniso_function_eval(f, [2.0].as_ptr(), 1, &mut v), AnisoStatus::Dimension);
        assert!(!last_error().is_empty());
        aniso_function_free(f);
    }
}

#[test]
fn parse_errors_are_reported() {
    let mut f = ptr::null_mut();
    unsafe {
        assert_eq!(aniso_function_parse(cs("x1 + * 2").as_ptr(), 1, &mut f), AnisoStatus::Parse);
        assert!(f.is_null());
        assert!(last_error().contains("byte"), "{}", last_error());
        assert_eq!(aniso_function_parse(cs("x1 + x2").as_ptr(), 1, &mut f), AnisoStatus::Dimension);
        assert_eq!(aniso_function_parse(ptr::null(), 1, &mut f), AnisoStatus::NullPointer);
        let bad = [0xffu8, 0];
        assert_eq!(aniso_function_parse(bad.as_ptr().cast(), 1, &mut f), AnisoStatus::InvalidUtf8);
    }
}

#[test]
fn success_clears_last_error() {
    let mut f = ptr::null_mut();
    unsafe {
        assert_ne!(aniso_function_parse(cs("(").as_ptr(), 1, &mut f), AnisoStatus::Ok);
        assert!(!last_error().is_empty());
        aniso_function_free(function("x1", 1));
    }
    assert!(last_error().is_empty());
}

#[test]
fn pair_roundtrip_and_bregman() {
    let p = pair("cubic_abs", 1);
    unsafe {
        assert_eq!(aniso_pair_dim(p), 1);
        let x = [1.7];
        let mut g = [0.0];
        let mut back = [0.0];
        assert_eq!(aniso_pair_grad_phi(p, x.as_ptr(), 1, g.as_mut_ptr()), AnisoStatus::Ok);
        assert_eq!(aniso_pair_grad_phi_star(p, g.as_ptr(), 1, back.as_mut_ptr()), AnisoStatus::Ok);
        assert!((back[0] - x[0]).abs() < 1e-12);
        let (mut phi, mut star) = (0.0, 0.0);
        aniso_pair_phi(p, x.as_ptr(), 1, &mut phi);
        aniso_pair_phi_star(p, g.as_ptr(), 1, &mut star);
        assert!((phi + star - x[0] * g[0]).abs() < 1e-12);
        let mut d = -1.0;
        assert_eq!(aniso_pair_bregman(p, x.as_ptr(), x.as_ptr(), 1, &mut d), AnisoStatus::Ok);
        assert!(d.abs() < 1e-15);
        assert_eq!(aniso_pair_bregman(p, x.as_ptr(), [0.0].as_ptr(), 1, &mut d), AnisoStatus::Ok);
        assert!((d - 1.7f64.powi(3) / 3.0).abs() < 1e-12);
        aniso_pair_free(p);
        let mut q = ptr::null_mut();
        assert_eq!(aniso_pair_new(cs("nonexistent").as_ptr(), 1, &mut q), AnisoStatus::NotFound);
    }
}

#[test]
fn plans() {
    let mut p = ptr::null_mut();
    unsafe {
        assert_eq!(aniso_plan_grid([0.0, 0.0].as_ptr(), [1.0, 1.0].as_ptr(), [3, 4].as_ptr(), 2, &mut p), AnisoStatus::Ok);
        assert_eq!(aniso_plan_len(p), 12);
        aniso_plan_free(p);
        assert_eq!(aniso_plan_random([0.0].as_ptr(), [1.0].as_ptr(), 1, 7, 3, &mut p), AnisoStatus::Ok);
        assert_eq!(aniso_plan_len(p), 7);
        aniso_plan_free(p);
        assert_eq!(aniso_plan_points([0.0, 1.0, 2.0, 3.0].as_ptr(), 2, 2, &mut p), AnisoStatus::Ok);
        assert_eq!(aniso_plan_len(p), 2);
        aniso_plan_free(p);
        assert_eq!(aniso_plan_grid([1.0].as_ptr(), [0.0].as_ptr(), [3].as_ptr(), 1, &mut p), AnisoStatus::InvalidArgument);
    }
}

#[test]
fn check_holds_and_json() {
    let f = function("x1^2", 1);
    let p = pair("quadratic:1", 1);
    let mut plan = ptr::null_mut();
    let mut rep = ptr::null_mut();
    unsafe {
        aniso_plan_grid([-2.0].as_ptr(), [2.0].as_ptr(), [21].as_ptr(), 1, &mut plan);
        let st = aniso_check(f, p, AnisoClass::BStrong as i32, plan, ptr::null(), -1.0, 0, &mut rep);
        assert_eq!(st, AnisoStatus::Ok, "{}", last_error());
        let mut v = AnisoVerdict::Violated;
        aniso_report_verdict(rep, &mut v);
        assert_eq!(v, AnisoVerdict::Holds);
        assert!(aniso_report_worst_margin(rep) >= 0.0);
        let mut json = ptr::null_mut();
        assert_eq!(aniso_report_to_json(rep, &mut json), AnisoStatus::Ok);
        let value: serde_json::Value = serde_json::from_str(CStr::from_ptr(json).to_str().unwrap()).unwrap();
        assert_eq!(value["verdict"], "holds");
        aniso_string_free(json);
        aniso_report_free(rep);
        assert_eq!(aniso_check(f, p, 42, plan, ptr::null(), -1.0, 0, &mut rep), AnisoStatus::InvalidArgument);
        aniso_plan_free(plan);
        aniso_pair_free(p);
        aniso_function_free(f);
    }
}

#[test]
fn anisotropic_counterexample_witness() {
    let f = function("max(x1^2 + x2^4, (x1 + 1)^2 + (x2 - 1)^4)", 2);
    let p = pair("aniso_poly", 0);
    let (mut probes, mut anchors, mut rep) = (ptr::null_mut(), ptr::null_mut(), ptr::null_mut());
    unsafe {
        aniso_plan_grid([-8.0, -3.0].as_ptr(), [2.0, 3.0].as_ptr(), [51, 31].as_ptr(), 2, &mut probes);
        aniso_plan_points([-1.0, 0.0].as_ptr(), 1, 2, &mut anchors);
        let st = aniso_check(f, p, AnisoClass::AStrong as i32, probes, anchors, 1e-8, 0, &mut rep);
        assert_eq!(st, AnisoStatus::Ok, "{}", last_error());
        let mut v = AnisoVerdict::Holds;
        aniso_report_verdict(rep, &mut v);
        assert_eq!(v, AnisoVerdict::Violated);
        let mut w = [0.0; 2];
        let mut len = 0;
        assert_eq!(aniso_report_witness(rep, w.as_mut_ptr(), 1, &mut len), AnisoStatus::BufferTooSmall);
        assert_eq!(len, 2);
        assert_eq!(aniso_report_witness(rep, w.as_mut_ptr(), 2, &mut len), AnisoStatus::Ok);
        assert!((w[0] + 8.0).abs() < 1e-12 && (w[1] + 1.0).abs() < 1e-12, "{w:?}");
        aniso_report_free(rep);
        aniso_plan_free(anchors);
        aniso_plan_free(probes);
        aniso_pair_free(p);
        aniso_function_free(f);
    }
}

#[test]
fn descend_converges_in_one_step() {
    let f = function("0.5*x1^2", 1);
    let p = pair("quadratic:1", 1);
    let mut x = [3.0];
    let (mut iters, mut status) = (0, AnisoDescentStatus::Diverged);
    unsafe {
        let st = aniso_descend(f, p, x.as_mut_ptr(), 1, 100, 1e-9, &mut iters, &mut status);
        assert_eq!(st, AnisoStatus::Ok, "{}", last_error());
        assert_eq!(status, AnisoDescentStatus::Converged);
        assert!(x[0].abs() < 1e-12);
        aniso_function_free(f);
        let g = function("1.5*x1^2", 1);
        let mut y = [1.0];
        aniso_descend(g, p, y.as_mut_ptr(), 1, 100, 1e-9, &mut iters, &mut status);
        assert_eq!(status, AnisoDescentStatus::Diverged);
        aniso_function_free(g);
        aniso_pair_free(p);
    }
}

#[test]
fn scenarios_through_ffi() {
    let n = aniso_scenario_count();
    assert!(n > 0);
    let names: Vec<String> = (0..n).map(|i| unsafe { CStr::from_ptr(aniso_scenario_name(i)) }.to_str().unwrap().to_owned()).collect();
    assert!(aniso_scenario_name(n).is_null());
    assert!(names.iter().any(|s| s == "shift_vs_tilt"));
    let mut json = ptr::null_mut();
    let mut passed = 0;
    unsafe {
        assert_eq!(aniso_scenario_run(cs("shift_vs_tilt").as_ptr(), &mut json, &mut passed), AnisoStatus::Ok);
        assert_eq!(passed, 1);
        let v: serde_json::Value = serde_json::from_str(CStr::from_ptr(json).to_str().unwrap()).unwrap();
        assert_eq!(v["name"], "shift_vs_tilt");
        aniso_string_free(json);
        assert_eq!(aniso_scenario_run(cs("nope").as_ptr(), &mut json, &mut passed), AnisoStatus::NotFound);
    }
}

#[test]
fn null_handles_are_rejected() {
    let mut v = 0.0;
    unsafe {
        assert_eq!(aniso_function_eval(ptr::null(), [0.0].as_ptr(), 1, &mut v), AnisoStatus::NullPointer);
        assert_eq!(aniso_report_verdict(ptr::null(), ptr::null_mut()), AnisoStatus::NullPointer);
        assert!(aniso_report_worst_margin(ptr::null()).is_nan());
        aniso_function_free(ptr::null_mut());
        aniso_string_free(ptr::null_mut());
    }
}
