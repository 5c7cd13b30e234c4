//! Acceptance suite: one line per criterion, nonzero exit on an unexpected result.
//!
//! Run with `cargo test -p aniso-core --test acceptance`.

use std::process::ExitCode;
use std::time::Instant;

use aniso_core::anisotropic::{check_aniso_convexity, AnisoCheckSpec};
use aniso_core::bregman::{check_b_smooth, CheckOptions};
use aniso_core::conjugacy::{discrete_conjugate, pointwise_conjugate_1d, SaddleProbe};
use aniso_core::expr::Expr;
use aniso_core::funcs::{LegendrePair, ScalarFunction};
use aniso_core::sampling::SamplingPlan;
use aniso_core::scenarios::{self, counter_rel_str_cvx_function, counterex_weak_nd_function, quartic_residual, DEFAULT_SEED};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

/// Outcome of one criterion.
struct Outcome {
    passed: bool,
    detail: String,
}

fn outcome(passed: bool, detail: impl Into<String>) -> Outcome {
    Outcome { passed, detail: detail.into() }
}

fn rel(a: f64, b: f64) -> f64 {
    (a - b).abs() / b.abs().max(1.0)
}

fn c1_counter_rel_str_cvx() -> Outcome {
    let phi = LegendrePair::aniso_poly();
    let f = counter_rel_str_cvx_function();
    let c = 2f64.powf(-1.0 / 3.0);
    // ȳ = x̄ − ∇φ*(v̄) with v̄ = (−1, −2): ∇φ*(v) = (v₁/2, sign(v₂)|v₂/4|^{1/3}).
    let y_bar = [-1.0 + 0.5, c];
    let beta = 0.25 + 2f64.powf(-4.0 / 3.0) - 1.0;
    let f_hat = f.evaluate(&[-8.0, -1.0]);
    let bound = 7.5f64.powi(2) + (1.0 + c).powi(4) - beta;
    let lib_bound = phi.phi(&[-8.0 - y_bar[0], -1.0 - y_bar[1]]) - beta;
    let spec = AnisoCheckSpec::new(
        f,
        phi,
        1.0,
        SamplingPlan::points(vec![vec![-1.0, 0.0]]).unwrap(),
        SamplingPlan::grid(vec![-8.0, -3.0], vec![2.0, 3.0], vec![51, 31]).unwrap(),
    )
    .unwrap();
    let rep = check_aniso_convexity(&spec).unwrap();
    let ok = f_hat == 65.0 && rel(lib_bound, bound) <= 1e-9 && bound - 65.0 >= 1.0 && rep.violated() && -rep.worst_margin >= 1.0;
    outcome(ok, format!("f(x̂) = {f_hat}, bound = {bound:.12} (library {lib_bound:.12}), verdict {:?}, witness margin {:.6}", rep.verdict, -rep.worst_margin))
}

fn c2_counterex_weak_nd() -> Outcome {
    let phi = LegendrePair::aniso_poly();
    let f = counterex_weak_nd_function();
    let c = 2f64.powf(-1.0 / 3.0);
    let y_bar = [0.5, -c];
    let beta = (3.0 - 2f64.powf(2.0 / 3.0)) / 4.0;
    let bound = -phi.phi(&[0.0 - y_bar[0], -1.0 - y_bar[1]]) - beta;
    let want = 2f64.cbrt() * (2f64.powf(4.0 / 3.0) - 3.0);
    let f_hat = f.evaluate(&[0.0, -1.0]);
    let ok = (bound - want).abs() <= 1e-12 && f_hat == -1.0 && bound > f_hat;
    outcome(ok, format!("bound = {bound:.15}, closed form {want:.15}, f(x̂) = {f_hat}"))
}

fn c3_duality_failure() -> Outcome {
    let phi = LegendrePair::cubic_abs();
    let f = phi.phi_function().shift_tilt(&[0.0], &[1.0], 0.0).unwrap();
    let f_star = |v: f64| pointwise_conjugate_1d(&f, v, -4.0, 4.0, 801).0;
    let h = |x: f64| f_star(x) - phi.phi_star(&[x]);
    let m = |x: f64| phi.phi_star(&[x]) - f_star(x);
    let sd = |g: &dyn Fn(f64) -> f64, x: f64, s: f64| (g(x + s) - 2.0 * g(x) + g(x - s)) / (s * s);
    let mut near0 = Vec::new();
    let mut near1 = Vec::new();
    let mut worst_rel: f64 = 0.0;
    for k in 2..=6 {
        let d = 10f64.powi(-k);
        let a = sd(&h, d, d / 10.0);
        let b = sd(&m, 1.0 + d, d / 10.0);
        worst_rel = worst_rel.max(rel(a, 0.5 * (1.0 - d).powf(-0.5) - 0.5 * d.powf(-0.5)));
        worst_rel = worst_rel.max(rel(b, 0.5 * (1.0 + d).powf(-0.5) - 0.5 * d.powf(-0.5)));
        near0.push(a);
        near1.push(b);
    }
    let dec = |v: &[f64]| v.windows(2).all(|w| w[1] < w[0]);
    let ok = dec(&near0) && dec(&near1) && near0[2] <= -49.0 && worst_rel <= 1e-2;
    outcome(ok, format!("near 0: {near0:.3?}; near 1: {near1:.3?}; max deviation from closed form {worst_rel:.1e}"))
}

fn c4_b_smooth(l: f64) -> Outcome {
    let f = quartic_residual();
    let plan = SamplingPlan::grid(vec![-3.0, -3.0], vec![3.0, 3.0], vec![101, 101]).unwrap();
    let rep = check_b_smooth(&f, &LegendrePair::quartic_quadratic(l, 2).unwrap(), &plan, &CheckOptions::default()).unwrap();
    // Conjugate on the line y = (t, −t): f*(y) = 5t + ¾|t|^{4/3}.
    let ts: Vec<f64> = (0..21).map(|k| -1.0 + 0.1 * k as f64).collect();
    let dual = SamplingPlan::points(ts.iter().map(|t| vec![*t, -*t]).collect()).unwrap();
    let disc = discrete_conjugate(&f, &plan, &dual).unwrap();
    let h: f64 = 0.06;
    let mut worst_ratio: f64 = 0.0;
    for (t, d) in ts.iter().zip(&disc.values) {
        let closed = 5.0 * t + 0.75 * t.abs().powf(4.0 / 3.0);
        // Along s = x₁ − x₂ the grid offers s within h of the maximizer 5 + t^{1/3}; the
        // concave objective loses at most ½·max|f″|·(h/2)² near it.
        let interp = 0.5 * 3.0 * (t.abs().cbrt() + h).powi(2) * (h / 2.0).powi(2) + 1e-12;
        if *d > closed + 1e-12 {
            worst_ratio = f64::INFINITY;
        }
        worst_ratio = worst_ratio.max((d - closed).abs() / interp);
    }
    let ok = rep.worst_margin >= -1e-8 && worst_ratio <= 2.0;
    let w = rep.witness.as_ref().map(|w| format!("{:?}", w.point)).unwrap_or_default();
    outcome(ok, format!("L = {l:.6}: worst margin {:.6e} at {w}; conjugate error / interpolation bound {worst_ratio:.3}", rep.worst_margin))
}

fn c5_univariate_max() -> Outcome {
    let r = scenarios::run_univariate_max_property(DEFAULT_SEED, 200).unwrap();
    let get = |k: &str| r.outcome(k).unwrap_or(f64::NAN);
    let ok = get("violations_r+1") == 0.0 && get("violations_r-1") == 0.0 && get("cusps_tested_r+1") > 0.0 && get("cusps_tested_r-1") > 0.0;
    outcome(
        ok,
        format!(
            "200 instances per sign; r=+1: {} violations over {} cusps (worst margin {:.2e}); r=-1: {} violations over {} cusps (worst margin {:.2e})",
            get("violations_r+1"),
            get("cusps_tested_r+1"),
            get("worst_margin_r+1"),
            get("violations_r-1"),
            get("cusps_tested_r-1"),
            get("worst_margin_r-1")
        ),
    )
}

fn c6_duality() -> Outcome {
    let r = scenarios::run_conjugate_duality_property(DEFAULT_SEED, 20).unwrap();
    let get = |k: &str| r.outcome(k).unwrap_or(f64::NAN);
    outcome(
        r.passed && get("instances") == 20.0,
        format!(
            "20 instances: {} convexity failures (worst midpoint margin {:.2e}), {} a-smooth failures",
            get("convexity_failures"),
            get("midpoint_worst_margin"),
            get("smoothness_failures")
        ),
    )
}

fn c7_saddle() -> Outcome {
    let r = scenarios::run_saddle_property(DEFAULT_SEED, 10).unwrap();
    let ratio = r.outcome("worst_gap_to_tolerance_ratio").unwrap_or(f64::NAN);
    let f = counter_rel_str_cvx_function();
    let phi = LegendrePair::aniso_poly();
    let probe = SaddleProbe::new(
        &f,
        &phi,
        &SamplingPlan::grid(vec![-12.0, -3.0], vec![8.0, 3.0], vec![201, 121]).unwrap(),
        &SamplingPlan::grid(vec![-1.0, 0.0], vec![0.0, 1.0], vec![21, 21]).unwrap(),
    )
    .unwrap();
    let sweep = probe.sweep(&SamplingPlan::grid(vec![-9.0, -9.0], vec![-3.0, -3.0], vec![13, 13]).unwrap()).unwrap();
    let ok = r.passed && ratio <= 5.0 && sweep.max_gap >= 0.5;
    outcome(ok, format!("10 instances: worst |gap| / grid tolerance {ratio:.3}; counterexample gap {:.4} at v̄ = {:?}", sweep.max_gap, sweep.max_gap_at))
}

fn c8_descent() -> Outcome {
    let r = scenarios::run_descent_corpus().unwrap();
    let corpus = scenarios::descent_corpus().unwrap();
    let parts: Vec<String> = corpus
        .iter()
        .map(|(n, ..)| {
            format!(
                "{n}: {} steps, max residual {:.1e}, |grad| {:.1e}",
                r.outcome(&format!("{n}_iterations")).unwrap_or(f64::NAN),
                r.outcome(&format!("{n}_max_residual")).unwrap_or(f64::NAN),
                r.outcome(&format!("{n}_final_gradient_norm")).unwrap_or(f64::NAN)
            )
        })
        .collect();
    let iters_ok = corpus.iter().all(|(n, ..)| r.outcome(&format!("{n}_iterations")).is_some_and(|k| k <= 500.0));
    outcome(r.passed && corpus.len() == 5 && iters_ok, parts.join("; "))
}

fn c9_legendre() -> Outcome {
    let pairs = vec![
        LegendrePair::quadratic(1.0, 1).unwrap(),
        LegendrePair::quadratic(0.25, 3).unwrap(),
        LegendrePair::power_even(4.0, 1.0, 2).unwrap(),
        LegendrePair::power_even(1.5, 2.0, 1).unwrap(),
        LegendrePair::quartic_quadratic(3.0, 2).unwrap(),
        LegendrePair::cubic_abs(),
        LegendrePair::three_halves(),
        LegendrePair::aniso_poly(),
    ];
    let mut rng = ChaCha8Rng::seed_from_u64(DEFAULT_SEED);
    let (mut worst_inv, mut worst_fy, mut worst_name) = (0.0f64, 0.0f64, String::new());
    for p in &pairs {
        for _ in 0..1000 {
            let x: Vec<f64> = (0..p.dim()).map(|_| rng.gen_range(-10.0..10.0)).collect();
            let g = p.grad_phi(&x);
            let back = p.grad_phi_star(&g);
            let inv = x.iter().zip(&back).map(|(a, b)| rel(*b, *a)).fold(0.0, f64::max);
            let ip: f64 = x.iter().zip(&g).map(|(a, b)| a * b).sum();
            let fy = rel(p.phi(&x) + p.phi_star(&g), ip);
            if inv.max(fy) > worst_inv.max(worst_fy) {
                worst_name = p.label().to_string();
            }
            worst_inv = worst_inv.max(inv);
            worst_fy = worst_fy.max(fy);
        }
    }
    let ok = worst_inv <= 1e-8 && worst_fy <= 1e-8;
    outcome(ok, format!("{} pairs x 1000 points: worst inverse error {worst_inv:.1e}, worst Fenchel-Young error {worst_fy:.1e} ({worst_name})", pairs.len()))
}

fn c10_identities() -> Outcome {
    let r = scenarios::run_moreau_klee_identities().unwrap();
    let worst = r.outcomes.iter().filter(|(k, _)| k.ends_with("_coarse")).map(|(_, v)| *v).fold(0.0, f64::max);
    let n = r.reports.len();
    outcome(r.passed && n == 18, format!("{n} identity checks, worst coarse discrepancy {worst:.2e}, all decreasing under refinement: {}", r.passed))
}

/// Random expression text in `x1..xn`, smooth away from measure-zero sets.
fn random_expr(rng: &mut ChaCha8Rng, n: usize, depth: usize) -> String {
    if depth == 0 || rng.gen_bool(0.2) {
        return if rng.gen_bool(0.7) {
            format!("x{}", rng.gen_range(1..=n))
        } else {
            format!("{:.2}", rng.gen_range(-2.0..2.0))
        };
    }
    let mut sub = || random_expr(rng, n, depth - 1);
    let (a, b) = (sub(), sub());
    match rng.gen_range(0..13) {
        0 => format!("({a} + {b})"),
        1 => format!("({a} - {b})"),
        2 | 3 => format!("({a} * {b})"),
        4 => format!("({a} / (1 + ({b})^2))"),
        5 => format!("({a})^{}", rng.gen_range(2..=3)),
        6 => format!("-({a})"),
        7 => format!("exp(({a}) / (1 + ({b})^2))"),
        8 => format!("log(1 + ({a})^2)"),
        9 => format!("sqrt(1 + ({a})^2)"),
        10 => format!("abs({a})"),
        11 => format!("max({a}, {b})"),
        _ => format!("(1 + ({a})^2)^({b} / 4)"),
    }
}

fn c11_autodiff() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(DEFAULT_SEED);
    let (mut tested, mut rejected, mut worst) = (0usize, 0usize, 0.0f64);
    let h = 1e-5;
    while tested < 1000 {
        let n = rng.gen_range(1..=3);
        let depth = rng.gen_range(1..=4);
        let src = random_expr(&mut rng, n, depth);
        let e = Expr::parse_str(&src).expect("generated text parses");
        let x: Vec<f64> = (0..n).map(|_| rng.gen_range(-1.5..1.5)).collect();
        let Ok(d) = e.eval_dual(&x) else {
            rejected += 1;
            continue;
        };
        let f = ScalarFunction::from_expr_with_arity(n, e.clone());
        let at = |i: usize, s: f64| {
            let mut y = x.clone();
            y[i] += s;
            f.evaluate(&y)
        };
        let mut err: f64 = 0.0;
        let mut kink = false;
        for i in 0..n {
            let (fp, f0, fm) = (at(i, h), at(i, 0.0), at(i, -h));
            // A kink inside the stencil shows up as disagreeing one-sided slopes.
            let (right, left) = ((fp - f0) / h, (f0 - fm) / h);
            let scale = d.partials[i].abs().max(1.0);
            if (right - left).abs() > 1e-3 * scale {
                kink = true;
                break;
            }
            err = err.max(rel((fp - fm) / (2.0 * h), d.partials[i]));
        }
        if kink {
            rejected += 1;
            continue;
        }
        tested += 1;
        worst = worst.max(err);
    }
    outcome(worst <= 1e-6, format!("1000 (expression, point) pairs, {rejected} resampled at kinks or domain edges; worst relative error {worst:.2e}"))
}

fn main() -> ExitCode {
    let nominal = 42.0 + 60.0 * std::f64::consts::SQRT_2;
    let corrected = 162.0 + 60.0 * std::f64::consts::SQRT_2;
    // (label, expected to pass, runner)
    let criteria: Vec<(&str, bool, Box<dyn Fn() -> Outcome>)> = vec![
        ("1 max-of-shifts not a-strongly convex", true, Box::new(c1_counter_rel_str_cvx)),
        ("2 max-of-shifts not a-weakly convex", true, Box::new(c2_counterex_weak_nd)),
        ("3 Bregman duality failure", true, Box::new(c3_duality_failure)),
        ("4 quartic residual, nominal L = 42+60*sqrt2", false, Box::new(move || c4_b_smooth(nominal))),
        ("4 quartic residual, corrected L = 162+60*sqrt2", true, Box::new(move || c4_b_smooth(corrected))),
        ("5 univariate maxima at cusps", true, Box::new(c5_univariate_max)),
        ("6 conjugate duality", true, Box::new(c6_duality)),
        ("7 saddle-point probe", true, Box::new(c7_saddle)),
        ("8 dual-space preconditioned descent", true, Box::new(c8_descent)),
        ("9 Legendre-pair invariants", true, Box::new(c9_legendre)),
        ("10 Moreau-Klee identities", true, Box::new(c10_identities)),
        ("11 dual-number derivatives", true, Box::new(c11_autodiff)),
    ];
    let mut unexpected = 0;
    for (label, expected, run) in &criteria {
        let start = Instant::now();
        let o = run();
        let status = if o.passed { "PASS" } else { "FAIL" };
        let note = match (o.passed, expected) {
            (true, true) | (false, false) => "",
            _ => {
                unexpected += 1;
                " [UNEXPECTED]"
            }
        };
        let note = if !o.passed && !expected { " [known: nominal constant too small]" } else { note };
        println!("criterion {label}: {status}{note} ({:.1}s) {}", start.elapsed().as_secs_f64(), o.detail);
    }
    println!("acceptance: {} criteria lines, {unexpected} unexpected", criteria.len());
    if unexpected == 0 {
        ExitCode::SUCCESS
    } else {
        ExitCode::FAILURE
    }
}
