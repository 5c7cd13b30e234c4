//! Named, reproducible scenarios for the worked examples, counterexamples and
//! property sweeps. Each scenario hard-codes its reference constants,
//! re-derives them through the library and records both.

use std::collections::BTreeMap;
use std::f64::consts::SQRT_2;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::ser::SerializeMap;
use serde::{Serialize, Serializer};

use crate::anisotropic::{check_aniso_convexity, check_aniso_smooth, dual_preconditioned_descent, AnisoCheckSpec, DescentOptions, DescentStatus};
use crate::bregman::{check_b_convexity, check_b_smooth, check_b_smooth_ladder, verify_moreau_klee_identities, CheckOptions, Identity, IdentityOptions};
use crate::conjugacy::{discrete_conjugate, infimal_convolution, midpoint_convexity, pointwise_conjugate_1d, GridFunction, SaddleProbe};
use crate::error::{Error, Result};
use crate::funcs::{indicator, LegendrePair, MaxOfShifts, PiecewiseLinear, ScalarFunction, SubgradientPolicy};
use crate::io::{format_real, Csv};
use crate::report::{CheckReport, Verdict};
use crate::sampling::SamplingPlan;

/// Seed used by the registry entries of the seeded scenarios.
pub const DEFAULT_SEED: u64 = 20_240_611;

/// A CSV file produced by a scenario.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Artifact {
    pub file_name: String,
    pub columns: Vec<String>,
    pub rows: usize,
    #[serde(skip)]
    pub csv: Csv,
}

/// A named report from one of the checkers.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct NamedReport {
    pub name: String,
    pub report: CheckReport,
}

/// One asserted expectation of a scenario.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ScenarioCheck {
    pub name: String,
    pub passed: bool,
    pub detail: String,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ScenarioResult {
    pub name: String,
    #[serde(serialize_with = "ext_real_map")]
    pub outcomes: BTreeMap<String, f64>,
    pub reports: Vec<NamedReport>,
    pub artifacts: Vec<Artifact>,
    pub checks: Vec<ScenarioCheck>,
    pub passed: bool,
}

fn ext_real_map<S: Serializer>(m: &BTreeMap<String, f64>, s: S) -> std::result::Result<S::Ok, S::Error> {
    let mut map = s.serialize_map(Some(m.len()))?;
    for (k, v) in m {
        if v.is_finite() {
            map.serialize_entry(k, v)?;
        } else {
            map.serialize_entry(k, &format_real(*v))?;
        }
    }
    map.end()
}

impl ScenarioResult {
    fn new(name: &str) -> Self {
        ScenarioResult {
            name: name.to_string(),
            outcomes: BTreeMap::new(),
            reports: Vec::new(),
            artifacts: Vec::new(),
            checks: Vec::new(),
            passed: false,
        }
    }

    pub fn outcome(&self, key: &str) -> Option<f64> {
        self.outcomes.get(key).copied()
    }

    pub fn report(&self, name: &str) -> Option<&CheckReport> {
        self.reports.iter().find(|r| r.name == name).map(|r| &r.report)
    }

    pub fn check(&self, name: &str) -> Option<&ScenarioCheck> {
        self.checks.iter().find(|c| c.name == name)
    }

    pub fn failed_checks(&self) -> Vec<&str> {
        self.checks.iter().filter(|c| !c.passed).map(|c| c.name.as_str()).collect()
    }

    fn put(&mut self, key: impl Into<String>, value: f64) {
        self.outcomes.insert(key.into(), value);
    }

    fn add_report(&mut self, name: impl Into<String>, report: CheckReport) {
        self.reports.push(NamedReport { name: name.into(), report });
    }

    fn expect(&mut self, name: impl Into<String>, passed: bool, detail: impl Into<String>) {
        self.checks.push(ScenarioCheck { name: name.into(), passed, detail: detail.into() });
    }

    /// Relative agreement `|got − want| ≤ tol·max(1, |want|)`.
    fn expect_close(&mut self, name: impl Into<String>, got: f64, want: f64, tol: f64) {
        let err = (got - want).abs() / want.abs().max(1.0);
        let passed = err <= tol;
        self.expect(name, passed, format!("got {got}, expected {want}, relative error {err:.3e} (tolerance {tol:.0e})"));
    }

    fn expect_verdict(&mut self, name: impl Into<String>, report: &CheckReport, want: Verdict) {
        let detail = format!("verdict {:?}, expected {want:?}, worst margin {}", report.verdict, report.worst_margin);
        self.expect(name, report.verdict == want, detail);
    }

    fn artifact(&mut self, file_name: &str, csv: Csv) {
        self.artifacts.push(Artifact {
            file_name: file_name.to_string(),
            columns: csv.header().to_vec(),
            rows: csv.rows().len(),
            csv,
        });
    }

    fn finish(mut self) -> Self {
        let bad: Vec<String> = self.outcomes.iter().filter(|(_, v)| !v.is_finite()).map(|(k, _)| k.clone()).collect();
        if !bad.is_empty() {
            self.expect("outcomes_finite", false, format!("non-finite outcomes: {}", bad.join(", ")));
        }
        self.passed = self.checks.iter().all(|c| c.passed);
        self
    }
}

/// A registry entry.
#[derive(Clone, Copy)]
pub struct Scenario {
    pub name: &'static str,
    pub description: &'static str,
    pub run: fn() -> Result<ScenarioResult>,
}

impl std::fmt::Debug for Scenario {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("Scenario").field("name", &self.name).finish()
    }
}

static REGISTRY: &[Scenario] = &[
    Scenario {
        name: "counter_duality_bregman",
        description: "phi = cubic_abs, f = phi + x: f is B-smooth and B-strongly convex, but f* - phi* has unbounded negative curvature at 0",
        run: run_counter_duality_bregman,
    },
    Scenario {
        name: "a_strongly_cvx",
        description: "f = |Ax - b|^4 / 4 with A = [1 -1], b = 5 against quartic_quadratic(42 + 60 sqrt 2); conjugate on the line y1 + y2 = 0",
        run: run_a_strongly_cvx_example,
    },
    Scenario {
        name: "shift_vs_tilt",
        description: "f = indicator[-1,1] # three_halves: a-smooth, closed-form conjugate, not L phi-smooth for any L",
        run: run_shift_vs_tilt,
    },
    Scenario {
        name: "tilt_invariance_failure",
        description: "f = cubic_abs, g = 5x: f* # g* = (2/3)|x - 5|^(3/2) is not B*-strongly convex near 0",
        run: run_tilt_invariance_failure,
    },
    Scenario {
        name: "counter_rel_str_cvx",
        description: "max of two shifted x1^2 + x2^4 is Phi-convex but not a-strongly convex; line data and saddle gap",
        run: || run_counter_rel_str_cvx(true),
    },
    Scenario {
        name: "counterex_weak_nd",
        description: "max of two negated shifted x1^2 + x2^4 is not a-weakly convex; line data",
        run: || run_counterex_weak_nd(true),
    },
    Scenario {
        name: "univariate_max_property",
        description: "random univariate maxima of shifted references pass the anisotropic inequality at every cusp",
        run: || run_univariate_max_property(DEFAULT_SEED, 200),
    },
    Scenario {
        name: "epi_scaling_calculus",
        description: "1*f1 # 2*f2 is a-smooth relative to 1*phi1 # 2*phi2",
        run: || run_epi_scaling_calculus(DEFAULT_SEED),
    },
    Scenario {
        name: "conjugate_duality_property",
        description: "f = g # phi for random piecewise-linear g: f* - phi* is convex on the grid and f is a-smooth",
        run: || run_conjugate_duality_property(DEFAULT_SEED, 20),
    },
    Scenario {
        name: "saddle_property",
        description: "random univariate maxima of shifted references have no saddle gap up to grid tolerance",
        run: || run_saddle_property(DEFAULT_SEED, 10),
    },
    Scenario {
        name: "descent_corpus",
        description: "dual space preconditioned descent on certified a-smooth instances",
        run: run_descent_corpus,
    },
    Scenario {
        name: "moreau_klee_identities",
        description: "the six envelope/conjugate identities on three function/reference combinations each",
        run: run_moreau_klee_identities,
    },
];

pub fn registry() -> &'static [Scenario] {
    REGISTRY
}

pub fn find(name: &str) -> Result<&'static Scenario> {
    REGISTRY.iter().find(|s| s.name == name).ok_or_else(|| Error::UnknownScenario(name.to_string()))
}

pub fn run(name: &str) -> Result<ScenarioResult> {
    (find(name)?.run)()
}

fn linspace(a: f64, b: f64, n: usize) -> Vec<f64> {
    (0..n).map(|k| if k + 1 == n { b } else { a + (b - a) * k as f64 / (n - 1) as f64 }).collect()
}

fn smooth1(label: &str, f: impl Fn(f64) -> f64 + Send + Sync + 'static, g: impl Fn(f64) -> f64 + Send + Sync + 'static) -> ScalarFunction {
    ScalarFunction::smooth(1, label, move |x| f(x[0]), move |x| vec![g(x[0])])
}

/// Central second difference with step `s`.
fn second_difference(h: impl Fn(f64) -> f64, x: f64, s: f64) -> f64 {
    (h(x + s) - 2.0 * h(x) + h(x - s)) / (s * s)
}

fn strictly_decreasing(v: &[f64]) -> bool {
    v.windows(2).all(|w| w[1] < w[0])
}

// ---------------------------------------------------------------------------
// worked examples

/// `φ = cubic_abs`, `f = φ + x`.
pub fn run_counter_duality_bregman() -> Result<ScenarioResult> {
    let mut res = ScenarioResult::new("counter_duality_bregman");
    let phi = LegendrePair::cubic_abs();
    let f = phi.phi_function().shift_tilt(&[0.0], &[1.0], 0.0)?;
    let f_star = |v: f64| pointwise_conjugate_1d(&f, v, -4.0, 4.0, 801).0;
    let phi_star = |v: f64| phi.phi_star(&[v]);

    let mut ladder = Vec::new();
    let mut mirror = Vec::new();
    for k in 2..=6 {
        let d = 10f64.powi(-k);
        let s = d / 10.0;
        let fd = second_difference(|x| f_star(x) - phi_star(x), d, s);
        let closed = 0.5 * (d - 1.0).abs().powf(-0.5) - 0.5 * d.powf(-0.5);
        res.put(format!("second_diff_at_1e-{k}"), fd);
        res.expect_close(format!("second_diff_matches_closed_form_1e-{k}"), fd, closed, 1e-2);
        ladder.push(fd);
        let x = 1.0 + d;
        let fm = second_difference(|x| phi_star(x) - f_star(x), x, s);
        let closed_m = 0.5 * x.powf(-0.5) - 0.5 * d.powf(-0.5);
        res.put(format!("mirror_second_diff_at_1e-{k}"), fm);
        res.expect_close(format!("mirror_matches_closed_form_1e-{k}"), fm, closed_m, 1e-2);
        mirror.push(fm);
    }
    let monotone = strictly_decreasing(&ladder) && strictly_decreasing(&mirror);
    res.put("monotone", if monotone { 1.0 } else { 0.0 });
    res.expect("monotone", monotone, format!("ladder {ladder:?}, mirror {mirror:?}"));
    let at4 = ladder[2];
    res.expect("second_diff_at_1e-4_below_-49", at4 <= -49.0, format!("{at4}"));

    let fs2 = f_star(2.0);
    res.put("f_star(2)", fs2);
    res.expect_close("f_star(2)", fs2, 2.0 / 3.0, 1e-9);
    res.expect_close("f_star(2)_is_phi_star(1)", fs2, phi_star(1.0), 1e-9);

    let plan = SamplingPlan::grid1(-2.0, 2.0, 81);
    let opts = CheckOptions::default();
    let strong = check_b_convexity(&f, &phi, 1.0, &plan, &opts)?;
    res.expect_verdict("f_b_strongly_convex", &strong, Verdict::Holds);
    res.add_report("b_strong_convexity(f)", strong);
    let smooth = check_b_smooth(&f, &phi, &plan, &opts)?;
    res.expect_verdict("f_b_smooth", &smooth, Verdict::Holds);
    res.add_report("b_smooth(f)", smooth);

    // Closed-form conjugate f*(v) = φ*(v − 1) against the reference φ* = three_halves.
    let dual_pair = LegendrePair::three_halves();
    let conj = dual_pair.phi_function().shift_tilt(&[1.0], &[0.0], 0.0)?;
    let dual_strong = check_b_convexity(&conj, &dual_pair, 1.0, &plan, &opts)?;
    res.expect_verdict("f_star_not_b_star_strongly_convex", &dual_strong, Verdict::Violated);
    res.add_report("b_star_strong_convexity(f_star)", dual_strong);
    let dual_smooth = check_b_smooth(&conj, &dual_pair, &plan, &opts)?;
    res.expect_verdict("f_star_not_b_star_smooth", &dual_smooth, Verdict::Violated);
    res.add_report("b_star_smooth(f_star)", dual_smooth);
    Ok(res.finish())
}

/// `f(x) = ¼(x₁ − x₂ − 5)⁴`.
pub fn quartic_residual() -> ScalarFunction {
    ScalarFunction::smooth(
        2,
        "0.25*(x1 - x2 - 5)^4",
        |x| 0.25 * (x[0] - x[1] - 5.0).powi(4),
        |x| {
            let c = (x[0] - x[1] - 5.0).powi(3);
            vec![c, -c]
        },
    )
}

pub fn run_a_strongly_cvx_example() -> Result<ScenarioResult> {
    let mut res = ScenarioResult::new("a_strongly_cvx");
    let f = quartic_residual();
    let l_nominal = 42.0 + 60.0 * SQRT_2;
    // 3‖A‖⁴ + 6‖A‖³|b| + 3‖A‖²|b|² with ‖A‖ = √2, |b| = 5.
    let (na, b) = (SQRT_2, 5.0);
    let l_sufficient = 3.0 * na.powi(4) + 6.0 * na.powi(3) * b + 3.0 * na * na * b * b;
    res.put("L", l_nominal);
    res.expect_close("L", l_nominal, 126.852_813_742_385_7, 1e-9);
    res.put("L_sufficient", l_sufficient);
    // Largest eigenvalue of ∇²f(0) = 3(Ax − b)²AᵀA at x = 0.
    res.put("hessian_eigenvalue_at_origin", 3.0 * b * b * na * na);

    let plan = SamplingPlan::grid(vec![-3.0, -3.0], vec![3.0, 3.0], vec![101, 101])?;
    let nominal = check_b_smooth(&f, &LegendrePair::quartic_quadratic(l_nominal, 2)?, &plan, &CheckOptions::default())?;
    res.put("b_smooth_worst_margin", nominal.worst_margin);
    res.expect_verdict("b_smooth_nominal_constant", &nominal, Verdict::Holds);
    res.add_report("b_smooth(L=42+60sqrt2)", nominal);
    let sufficient = check_b_smooth(&f, &LegendrePair::quartic_quadratic(l_sufficient, 2)?, &plan, &CheckOptions::default())?;
    res.put("b_smooth_sufficient_worst_margin", sufficient.worst_margin);
    res.expect_verdict("b_smooth_sufficient_constant", &sufficient, Verdict::Holds);
    res.add_report("b_smooth(L=162+60sqrt2)", sufficient);

    let closed = |t: f64| 5.0 * t + 0.75 * t.abs().powf(4.0 / 3.0);
    let ts = linspace(-1.0, 1.0, 21);
    let dual = SamplingPlan::points(ts.iter().map(|t| vec![*t, -*t]).collect())?;
    let disc = discrete_conjugate(&f, &plan, &dual)?;
    let h = 0.06;
    let mut worst_ratio: f64 = 0.0;
    let mut above = false;
    for (t, d) in ts.iter().zip(&disc.values) {
        // s* = 5 + t^{1/3} maximizes ts − ¼(s − 5)⁴ and the grid offers s within h/2.
        let s_star = 5.0 + t.cbrt();
        let bound = 0.5 * 3.0 * ((s_star - 5.0).abs() + h).powi(2) * (h / 2.0).powi(2) + 1e-12;
        let c = closed(*t);
        above |= *d > c + 1e-12;
        worst_ratio = worst_ratio.max((d - c).abs() / bound);
    }
    res.put("conjugate_line_error_ratio", worst_ratio);
    res.expect("conjugate_line_match", worst_ratio <= 2.0 && !above, format!("worst |discrete − closed| / bound = {worst_ratio}"));
    let at = closed(1.0);
    res.put("f_star(1,-1)", at);
    res.expect_close("f_star(1,-1)", at, 5.75, 1e-9);
    res.put("discrete_f_star(1,-1)", disc.values[20]);
    Ok(res.finish())
}

/// `δ_[−1,1] □ three_halves` by its closed-form branches.
pub fn shift_vs_tilt_function() -> ScalarFunction {
    smooth1(
        "indicator[-1,1] # three_halves",
        |x| (2.0 / 3.0) * (x.abs() - 1.0).max(0.0).powf(1.5),
        |x| x.signum() * (x.abs() - 1.0).max(0.0).sqrt(),
    )
}

pub fn run_shift_vs_tilt() -> Result<ScenarioResult> {
    let mut res = ScenarioResult::new("shift_vs_tilt");
    let phi = LegendrePair::three_halves();
    let f = shift_vs_tilt_function();

    let f2 = f.evaluate(&[2.0]);
    res.put("f(2)", f2);
    res.expect_close("f(2)", f2, 2.0 / 3.0, 1e-9);
    let grid_f = infimal_convolution(&phi.phi_function(), &indicator(&[-1.0], &[1.0])?, &SamplingPlan::grid1(-4.0, 4.0, 81), &SamplingPlan::grid1(-1.0, 1.0, 2001))?;
    let closed_err = grid_f.points().iter().zip(&grid_f.values).map(|(x, v)| (v - f.evaluate(x)).abs()).fold(0.0, f64::max);
    res.put("infimal_convolution_max_error", closed_err);
    res.expect("infimal_convolution_matches_branches", closed_err <= 1e-12, format!("{closed_err}"));

    let anchors = SamplingPlan::grid1(-3.0, 3.0, 61);
    let probes = SamplingPlan::grid1(-6.0, 6.0, 241);
    let smooth = check_aniso_smooth(&f, &phi, &anchors, &probes, 1e-8)?;
    res.expect_verdict("a_smooth", &smooth, Verdict::Holds);
    res.add_report("a_smooth(f)", smooth);

    let primal = SamplingPlan::grid1(-6.0, 6.0, 1201);
    let dual = SamplingPlan::grid1(-2.0, 2.0, 41);
    let disc = discrete_conjugate(&f, &primal, &dual)?;
    // f′ is ½-Hölder with constant 1, so a grid node within h/2 of the maximizer loses at most ⅔(h/2)^{3/2}.
    let bound = (2.0 / 3.0) * 0.005f64.powf(1.5) + 1e-12;
    let conj_err = disc
        .points()
        .iter()
        .zip(&disc.values)
        .map(|(v, d)| (d - (v[0].abs() + v[0].abs().powi(3) / 3.0)).abs())
        .fold(0.0, f64::max);
    res.put("conjugate_max_error", conj_err);
    res.expect("conjugate_matches_closed_form", conj_err <= bound, format!("{conj_err} vs bound {bound}"));
    let fs1 = pointwise_conjugate_1d(&f, 1.0, -6.0, 6.0, 1201).0;
    res.put("f_star(1)", fs1);
    res.expect_close("f_star(1)", fs1, 4.0 / 3.0, 1e-9);

    let mut pts: Vec<Vec<f64>> = (1..=12).map(|k| vec![1.0 + 10f64.powi(-k)]).collect();
    pts.push(vec![1.0]);
    let ladder = check_b_smooth_ladder(&f, &phi, &SamplingPlan::points(pts)?, &[1.0, 10.0, 100.0, 1000.0], 1e-12)?;
    let mut last = f64::INFINITY;
    let mut shrinking = true;
    for (l, rep) in ladder {
        let w = rep.witness.as_ref().map_or(f64::NAN, |w| w.point[0]);
        res.put(format!("ladder_witness_L{l}"), w);
        shrinking &= w > 1.0 && w < last;
        last = w;
        res.expect_verdict(format!("not_smooth_L{l}"), &rep, Verdict::Violated);
        res.add_report(format!("b_smooth(L={l})"), rep);
    }
    res.expect("ladder_witness_decreases_to_1", shrinking, "witnesses approach 1 from above as L grows");
    Ok(res.finish())
}

pub fn run_tilt_invariance_failure() -> Result<ScenarioResult> {
    let mut res = ScenarioResult::new("tilt_invariance_failure");
    let phi = LegendrePair::cubic_abs();
    let dual_pair = LegendrePair::three_halves();
    let target = |x: f64| (2.0 / 3.0) * (x - 5.0).abs().powf(1.5);

    // f* □ g* with f* = three_halves and g* = δ_{5}.
    let out = SamplingPlan::grid1(-2.0, 8.0, 101);
    let conv = infimal_convolution(&dual_pair.phi_function(), &indicator(&[5.0], &[5.0])?, &out, &SamplingPlan::grid1(4.0, 6.0, 21))?;
    let err = conv.points().iter().zip(&conv.values).map(|(x, v)| (v - target(x[0])).abs()).fold(0.0, f64::max);
    res.put("inf_conv_max_error", err);
    res.expect("inf_conv_matches_closed_form", err <= 1e-12, format!("{err}"));
    let at5 = conv.values[70];
    res.put("inf_conv(5)", at5);
    res.expect("inf_conv(5)_is_zero", at5.abs() <= 1e-15, format!("{at5}"));

    // (f + g)* = f* □ g*, evaluated pointwise.
    let fg = phi.phi_function().shift_tilt(&[0.0], &[5.0], 0.0)?;
    let h = |x: f64| pointwise_conjugate_1d(&fg, x, -8.0, 8.0, 1601).0;
    let limit = 1.0 / 20f64.sqrt();
    let mut last = 0.0;
    for k in 2..=6 {
        let d = 10f64.powi(-k);
        let fd = second_difference(h, d, 1e-3);
        let phi_fd = second_difference(|x| phi.phi_star(&[x]), d, d / 10.0);
        res.put(format!("second_diff_at_1e-{k}"), fd);
        res.put(format!("phi_star_second_diff_at_1e-{k}"), phi_fd);
        last = fd;
    }
    res.expect_close("second_diff_limit", last, limit, 1e-4);
    res.put("limit_one_over_sqrt20", limit);
    let phi_growth = res.outcome("phi_star_second_diff_at_1e-6").unwrap_or(0.0);
    res.expect("reference_curvature_unbounded", phi_growth > 400.0, format!("{phi_growth}"));

    let conv_fn = smooth1("(2/3)|x-5|^1.5", target, |x| -(5.0 - x).abs().sqrt() * (5.0 - x).signum());
    let near0 = SamplingPlan::grid1(-1e-2, 1e-2, 41);
    let rep = check_b_convexity(&conv_fn, &dual_pair, 1.0, &near0, &CheckOptions::default())?;
    res.expect_verdict("not_b_star_strongly_convex_near_0", &rep, Verdict::Violated);
    res.put("b_star_strong_worst_margin", rep.worst_margin);
    res.add_report("b_star_strong_convexity(inf_conv)", rep);

    let smooth = check_aniso_smooth(&fg, &phi, &SamplingPlan::grid1(-2.0, 2.0, 41), &SamplingPlan::grid1(-4.0, 4.0, 81), 1e-8)?;
    res.expect_verdict("tilted_reference_not_a_smooth", &smooth, Verdict::Violated);
    res.add_report("a_smooth(phi + 5x)", smooth);
    Ok(res.finish())
}

/// `max(φ(x), φ(x − (−1, 1)))` with `φ = x₁² + x₂⁴`.
pub fn counter_rel_str_cvx_function() -> ScalarFunction {
    MaxOfShifts::new(LegendrePair::aniso_poly(), 1.0, vec![vec![0.0, 0.0], vec![-1.0, 1.0]], vec![0.0, 0.0])
        .expect("valid shifts")
        .function()
}

/// `max(−φ(x), −φ(x − (1, −1)))` with `φ = x₁² + x₂⁴`.
pub fn counterex_weak_nd_function() -> ScalarFunction {
    MaxOfShifts::new(LegendrePair::aniso_poly(), -1.0, vec![vec![0.0, 0.0], vec![1.0, -1.0]], vec![0.0, 0.0])
        .expect("valid shifts")
        .function()
}

fn centroid(vs: &[Vec<f64>]) -> Vec<f64> {
    let n = vs[0].len();
    (0..n).map(|j| vs.iter().map(|v| v[j]).sum::<f64>() / vs.len() as f64).collect()
}

fn line_csv(f: &ScalarFunction, bound: impl Fn(&[f64]) -> f64, from: &[f64], to: &[f64]) -> Csv {
    let mut csv = Csv::new(["t", "f", "bound"]);
    for t in linspace(0.0, 1.1, 111) {
        let x: Vec<f64> = from.iter().zip(to).map(|(a, b)| a + t * (b - a)).collect();
        csv.push(vec![t, f.evaluate(&x), bound(&x)]);
    }
    csv
}

pub fn run_counter_rel_str_cvx(emit_figure: bool) -> Result<ScenarioResult> {
    let mut res = ScenarioResult::new("counter_rel_str_cvx");
    let phi = LegendrePair::aniso_poly();
    let f = counter_rel_str_cvx_function();
    let c = 2f64.powf(-1.0 / 3.0);
    let (x_bar, x_hat) = ([-1.0, 0.0], [-8.0, -1.0]);
    let (y_bar_ref, beta_ref) = ([-0.5, c], 0.25 + 2f64.powf(-4.0 / 3.0) - 1.0);

    let f_bar = f.evaluate(&x_bar);
    res.put("f(x_bar)", f_bar);
    res.expect_close("f(x_bar)", f_bar, 1.0, 1e-9);
    let v_bar = centroid(&f.gradient(&x_bar));
    let w = phi.grad_phi_star(&v_bar);
    let y_bar = [x_bar[0] - w[0], x_bar[1] - w[1]];
    res.put("y_bar_1", y_bar[0]);
    res.put("y_bar_2", y_bar[1]);
    res.expect_close("y_bar_1", y_bar[0], y_bar_ref[0], 1e-9);
    res.expect_close("y_bar_2", y_bar[1], y_bar_ref[1], 1e-9);
    let beta = phi.phi(&[x_bar[0] - y_bar[0], x_bar[1] - y_bar[1]]) - f_bar;
    res.put("beta_bar", beta);
    res.expect_close("beta_bar", beta, beta_ref, 1e-9);
    let f_hat = f.evaluate(&x_hat);
    res.put("f(x_hat)", f_hat);
    res.expect_close("f(x_hat)", f_hat, 65.0, 1e-9);
    let bound = |x: &[f64]| phi.phi(&[x[0] - y_bar[0], x[1] - y_bar[1]]) - beta;
    let b_hat = bound(&x_hat);
    let b_closed = 7.5f64.powi(2) + (1.0 + c).powi(4) - beta_ref;
    res.put("bound(x_hat)", b_hat);
    res.expect_close("bound(x_hat)", b_hat, b_closed, 1e-9);
    res.put("bound_minus_f", b_hat - f_hat);
    res.expect("bound_exceeds_f_by_1", b_hat - f_hat >= 1.0, format!("{}", b_hat - f_hat));

    let anchors = SamplingPlan::points(vec![x_bar.to_vec()])?;
    let probes = SamplingPlan::grid(vec![-10.0, -3.0], vec![2.0, 3.0], vec![61, 31])?;
    let rep = check_aniso_convexity(&AnisoCheckSpec::new(f.clone(), phi.clone(), 1.0, anchors, probes)?)?;
    res.put("a_strong_worst_margin", rep.worst_margin);
    res.expect_verdict("a_strong_violated", &rep, Verdict::Violated);
    res.expect("witness_margin_at_least_1", rep.worst_margin <= -1.0, format!("{}", rep.worst_margin));
    res.add_report("a_strong_convexity(f)", rep);

    let x_plan = SamplingPlan::grid(vec![-12.0, -3.0], vec![8.0, 3.0], vec![201, 121])?;
    let y_plan = SamplingPlan::grid(vec![-1.0, 0.0], vec![0.0, 1.0], vec![21, 21])?;
    let probe = SaddleProbe::new(&f, &phi, &x_plan, &y_plan)?;
    let sweep = probe.sweep(&SamplingPlan::grid(vec![-9.0, -9.0], vec![-3.0, -3.0], vec![13, 13])?)?;
    res.put("max_saddle_gap", sweep.max_gap);
    res.put("max_saddle_gap_v1", sweep.max_gap_at[0]);
    res.put("max_saddle_gap_v2", sweep.max_gap_at[1]);
    res.expect("saddle_gap_at_least_0.5", sweep.max_gap >= 0.5, format!("{} at {:?}", sweep.max_gap, sweep.max_gap_at));

    if emit_figure {
        res.artifact("counter_rel_str_cvx_line.csv", line_csv(&f, bound, &x_bar, &x_hat));
    }
    Ok(res.finish())
}

pub fn run_counterex_weak_nd(emit_figure: bool) -> Result<ScenarioResult> {
    let mut res = ScenarioResult::new("counterex_weak_nd");
    let phi = LegendrePair::aniso_poly();
    let f = counterex_weak_nd_function();
    let c = 2f64.powf(-1.0 / 3.0);
    let (x_bar, x_hat) = ([1.0, 0.0], [0.0, -1.0]);
    let (y_bar_ref, beta_ref) = ([0.5, -c], (3.0 - 2f64.powf(2.0 / 3.0)) / 4.0);
    let bound_ref = 2f64.cbrt() * (2f64.powf(4.0 / 3.0) - 3.0);

    let f_bar = f.evaluate(&x_bar);
    res.put("f(x_bar)", f_bar);
    res.expect_close("f(x_bar)", f_bar, -1.0, 1e-9);
    let v_bar = centroid(&f.gradient(&x_bar));
    let w = phi.grad_phi_star(&v_bar.iter().map(|t| -t).collect::<Vec<_>>());
    let y_bar = [x_bar[0] - w[0], x_bar[1] - w[1]];
    res.put("y_bar_1", y_bar[0]);
    res.put("y_bar_2", y_bar[1]);
    res.expect_close("y_bar_1", y_bar[0], y_bar_ref[0], 1e-9);
    res.expect_close("y_bar_2", y_bar[1], y_bar_ref[1], 1e-9);
    let beta = -f_bar - phi.phi(&[x_bar[0] - y_bar[0], x_bar[1] - y_bar[1]]);
    res.put("beta_bar", beta);
    res.expect_close("beta_bar", beta, beta_ref, 1e-9);
    let f_hat = f.evaluate(&x_hat);
    res.put("f(x_hat)", f_hat);
    res.expect_close("f(x_hat)", f_hat, -1.0, 1e-9);
    let bound = |x: &[f64]| -phi.phi(&[x[0] - y_bar[0], x[1] - y_bar[1]]) - beta;
    let b_hat = bound(&x_hat);
    res.put("bound(x_hat)", b_hat);
    res.expect("bound(x_hat)", (b_hat - bound_ref).abs() <= 1e-12, format!("{b_hat} vs {bound_ref}"));
    res.expect("bound_exceeds_f", b_hat > f_hat, format!("{b_hat} > {f_hat}"));

    let anchors = SamplingPlan::points(vec![x_bar.to_vec()])?;
    let probes = SamplingPlan::grid(vec![-2.0, -2.0], vec![2.0, 2.0], vec![41, 41])?;
    let rep = check_aniso_convexity(&AnisoCheckSpec::new(f.clone(), phi.clone(), -1.0, anchors, probes)?)?;
    res.put("a_weak_worst_margin", rep.worst_margin);
    res.expect_verdict("a_weak_violated", &rep, Verdict::Violated);
    res.add_report("a_weak_convexity(f)", rep);
    if emit_figure {
        res.artifact("counterex_weak_nd_line.csv", line_csv(&f, bound, &x_bar, &x_hat));
    }
    Ok(res.finish())
}

// ---------------------------------------------------------------------------
// property sweeps

fn univariate_catalog() -> Vec<LegendrePair> {
    vec![
        LegendrePair::quadratic(1.0, 1).expect("valid"),
        LegendrePair::cubic_abs(),
        LegendrePair::three_halves(),
        LegendrePair::power_even(4.0, 1.0, 1).expect("valid"),
    ]
}

fn random_max_of_shifts(rng: &mut ChaCha8Rng, pair: &LegendrePair, r: f64, sizes: std::ops::RangeInclusive<usize>, range: f64) -> MaxOfShifts {
    let m = rng.gen_range(sizes);
    let shifts = (0..m).map(|_| vec![rng.gen_range(-range..range)]).collect();
    let offsets = (0..m).map(|_| rng.gen_range(-range..range)).collect();
    MaxOfShifts::new(pair.clone(), r, shifts, offsets).expect("valid shifts")
}

/// Upper-row panel data: `f` and the anisotropic bound at the first cusp.
fn cusp_panel(m: &MaxOfShifts, cusp: f64) -> Csv {
    let f = m.function();
    let v = centroid(&f.gradient(&[cusp]));
    let w = m.pair.grad_phi_star(&[m.r * v[0]]);
    let fb = f.evaluate(&[cusp]);
    let mut csv = Csv::new(["t", "f", "bound"]);
    for t in linspace(cusp - 4.0, cusp + 4.0, 401) {
        let b = fb + m.r * m.pair.phi(&[t - cusp + w[0]]) - m.r * m.pair.phi(&w);
        csv.push(vec![t, f.evaluate(&[t]), b]);
    }
    csv
}

pub fn run_univariate_max_property(seed: u64, instances: usize) -> Result<ScenarioResult> {
    if instances == 0 {
        return Err(Error::InvalidParameter("instances must be at least 1".into()));
    }
    let mut res = ScenarioResult::new("univariate_max_property");
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let catalog = univariate_catalog();
    let probes = SamplingPlan::grid1(-10.0, 10.0, 2001);
    let policy = SubgradientPolicy::HullGrid { count: 11 };
    for r in [1.0, -1.0] {
        let tag = if r > 0.0 { "r+1" } else { "r-1" };
        let (mut violations, mut cusps_tested, mut worst) = (0usize, 0usize, f64::INFINITY);
        let mut panel = None;
        for i in 0..instances {
            let m = random_max_of_shifts(&mut rng, &catalog[i % catalog.len()], r, 2..=6, 3.0);
            let cusps = m.cusps(-10.0, 10.0, 4001);
            let anchors = if cusps.is_empty() { vec![vec![0.0]] } else { cusps.iter().map(|c| vec![*c]).collect() };
            cusps_tested += cusps.len();
            if panel.is_none() && !cusps.is_empty() {
                panel = Some(cusp_panel(&m, cusps[0]));
            }
            let spec = AnisoCheckSpec::new(m.function(), m.pair.clone(), r, SamplingPlan::points(anchors)?, probes.clone())?
                .with_policy(policy.clone())
                .with_far_field(false);
            let rep = check_aniso_convexity(&spec)?;
            worst = worst.min(rep.worst_margin);
            if rep.violated() {
                violations += 1;
                if violations == 1 {
                    res.add_report(format!("first_violation_{tag}"), rep);
                }
            }
        }
        res.put(format!("violations_{tag}"), violations as f64);
        res.put(format!("cusps_tested_{tag}"), cusps_tested as f64);
        res.put(format!("worst_margin_{tag}"), worst);
        res.expect(format!("zero_violations_{tag}"), violations == 0, format!("{violations} of {instances} instances violated"));
        if let Some(csv) = panel {
            res.artifact(&format!("univariate_max_{tag}.csv"), csv);
        }
    }
    res.put("instances", instances as f64);

    let single = MaxOfShifts::new(LegendrePair::cubic_abs(), 1.0, vec![vec![0.7]], vec![0.3])?;
    let spec = AnisoCheckSpec::new(single.function(), single.pair.clone(), 1.0, SamplingPlan::points(vec![vec![0.7]])?, probes)?.with_far_field(false);
    let rep = check_aniso_convexity(&spec)?;
    res.put("single_piece_worst_margin", rep.worst_margin);
    res.expect("single_piece_margin_zero", rep.holds() && rep.worst_margin.abs() <= 1e-12, format!("{}", rep.worst_margin));
    Ok(res.finish())
}

/// Random convex piecewise-linear function with sorted kinks in `[−kink, kink]`
/// and sorted slopes in `[−slope, slope]`, at least one of each sign.
fn random_piecewise_linear(rng: &mut ChaCha8Rng, pieces: std::ops::RangeInclusive<usize>, kink: f64, slope: f64) -> PiecewiseLinear {
    let k = rng.gen_range(pieces).max(2);
    let mut slopes: Vec<f64> = (0..k).map(|_| rng.gen_range(-slope..slope)).collect();
    slopes[0] = -rng.gen_range(0.25 * slope..slope);
    slopes[1] = rng.gen_range(0.25 * slope..slope);
    slopes.sort_by(f64::total_cmp);
    let mut kinks: Vec<f64> = (0..k - 1).map(|_| rng.gen_range(-kink..kink)).collect();
    kinks.sort_by(f64::total_cmp);
    let mut lines = vec![(slopes[0], rng.gen_range(-1.0..1.0))];
    for j in 0..k - 1 {
        let (a, b) = lines[j];
        lines.push((slopes[j + 1], b + (a - slopes[j + 1]) * kinks[j]));
    }
    PiecewiseLinear::new(&lines).expect("finite pieces")
}

/// `x ↦ min_z f₁(x − z) + a·f₂(z/a)` for convex C¹ `f₁, f₂` on ℝ.
///
/// The minimizer solves `f₂′(z/a) = f₁′(x − z)`, found by bisection on the
/// nondecreasing difference; the gradient is `f₁′(x − z*)`.
fn epi_inf_conv(f1: ScalarFunction, f2: ScalarFunction, a: f64) -> ScalarFunction {
    let solve = {
        let (f1, f2) = (f1.clone(), f2.clone());
        move |x: f64| -> (f64, f64) {
            let d1 = |t: f64| f1.smooth_gradient(&[t]).map_or(f64::NAN, |g| g[0]);
            let d2 = |t: f64| f2.smooth_gradient(&[t]).map_or(f64::NAN, |g| g[0]);
            let psi = |z: f64| d2(z / a) - d1(x - z);
            let (mut lo, mut hi) = (-1.0f64, 1.0f64);
            while psi(lo) > 0.0 && lo > -1e12 {
                lo *= 2.0;
            }
            while psi(hi) < 0.0 && hi < 1e12 {
                hi *= 2.0;
            }
            for _ in 0..200 {
                let mid = 0.5 * (lo + hi);
                if mid <= lo || mid >= hi {
                    break;
                }
                if psi(mid) < 0.0 {
                    lo = mid;
                } else {
                    hi = mid;
                }
            }
            let z = 0.5 * (lo + hi);
            (f1.evaluate(&[x - z]) + a * f2.evaluate(&[z / a]), d1(x - z))
        }
    };
    let s2 = solve.clone();
    ScalarFunction::smooth(1, format!("{} # {a}*{}", f1.label(), f2.label()), move |x| solve(x[0]).0, move |x| vec![s2(x[0]).1])
}

/// Grid infimum of `φ₁(x − z) + a·φ₂(z/a)`, flagging minima on the `z`-grid boundary.
fn grid_epi_sum(p1: &LegendrePair, p2: &LegendrePair, a: f64, x: f64, zs: &[f64]) -> (f64, bool) {
    let mut best = (f64::INFINITY, 0);
    for (k, z) in zs.iter().enumerate() {
        let v = p1.phi(&[x - z]) + a * p2.phi(&[z / a]);
        if v < best.0 {
            best = (v, k);
        }
    }
    (best.0, best.1 == 0 || best.1 + 1 == zs.len())
}

pub fn run_epi_scaling_calculus(seed: u64) -> Result<ScenarioResult> {
    let mut res = ScenarioResult::new("epi_scaling_calculus");
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let quad = LegendrePair::quadratic(1.0, 1)?;
    let both = LegendrePair::epi_sum(&[(1.0, quad.clone()), (1.0, quad.clone())])?;
    let zs = linspace(-10.0, 10.0, 4001);
    let quad_err = linspace(-3.0, 3.0, 61).iter().map(|x| (both.phi(&[*x]) - grid_epi_sum(&quad, &quad, 1.0, *x, &zs).0).abs()).fold(0.0, f64::max);
    res.put("quadratic_epi_sum_grid_error", quad_err);
    res.expect("quadratic_epi_sum_halves_curvature", both == LegendrePair::quadratic(2.0, 1)? && quad_err <= 1e-5, format!("{} with grid error {quad_err}", both.label()));

    let cubic = LegendrePair::cubic_abs();
    let combos = [(quad.clone(), quad.clone()), (quad.clone(), cubic.clone()), (cubic.clone(), cubic.clone())];
    let anchors = SamplingPlan::grid1(-4.0, 4.0, 81);
    let probes = SamplingPlan::grid1(-8.0, 8.0, 161);
    let a2 = 2.0;
    for (i, (p1, p2)) in combos.iter().enumerate() {
        let g1 = random_piecewise_linear(&mut rng, 2..=4, 2.0, 2.0);
        let g2 = random_piecewise_linear(&mut rng, 2..=4, 2.0, 2.0);
        let f = epi_inf_conv(g1.inf_conv(p1)?, g2.inf_conv(p2)?, a2);
        let phi = LegendrePair::epi_sum(&[(1.0, p1.clone()), (a2, p2.clone())])?;
        let (mut phi_err, mut on_edge) = (0.0f64, false);
        for x in linspace(-4.0, 4.0, 81) {
            let (v, edge) = grid_epi_sum(p1, p2, a2, x, &zs);
            phi_err = phi_err.max((v - phi.phi(&[x])).abs());
            on_edge |= edge;
        }
        res.put(format!("instance{i}_phi_grid_error"), phi_err);
        res.expect(format!("instance{i}_phi_matches_grid"), phi_err <= 1e-4, format!("{phi_err}"));
        let mut rep = check_aniso_smooth(&f, &phi, &anchors, &probes, 1e-8)?;
        if on_edge {
            rep = rep.inconclusive_unless_violated("reference infimum attained on the grid boundary");
        }
        res.put(format!("instance{i}_worst_margin"), rep.worst_margin);
        res.expect_verdict(format!("instance{i}_a_smooth"), &rep, Verdict::Holds);
        res.add_report(format!("a_smooth(instance{i})"), rep);
    }

    let rep = check_aniso_smooth(&cubic.phi_function(), &cubic, &anchors, &probes, 1e-8)?;
    res.expect_verdict("point_indicator_gives_reference", &rep, Verdict::Holds);
    res.add_report("a_smooth(phi)", rep);
    Ok(res.finish())
}

pub fn run_conjugate_duality_property(seed: u64, instances: usize) -> Result<ScenarioResult> {
    let mut res = ScenarioResult::new("conjugate_duality_property");
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let pairs = [LegendrePair::quadratic(1.0, 1)?, LegendrePair::cubic_abs()];
    let primal = SamplingPlan::grid1(-10.0, 10.0, 20001);
    let anchors = SamplingPlan::grid1(-5.0, 5.0, 101);
    let probes = SamplingPlan::grid1(-10.0, 10.0, 201);
    let (mut convex_fail, mut smooth_fail, mut worst_mid, mut worst_gstar) = (0usize, 0usize, f64::INFINITY, 0.0f64);
    for i in 0..instances {
        let pair = &pairs[i % pairs.len()];
        let g = random_piecewise_linear(&mut rng, 2..=5, 3.0, 2.0);
        let f = g.inf_conv(pair)?;
        let (a1, ak) = (g.slopes()[0], *g.slopes().last().expect("nonempty"));
        let dual = SamplingPlan::grid1(a1, ak, 201);
        let fs = discrete_conjugate(&f, &primal, &dual)?;
        let diff: Vec<f64> = fs.points().iter().zip(&fs.values).map(|(v, s)| s - pair.phi_star(v)).collect();
        for (v, d) in fs.points().iter().zip(&diff) {
            worst_gstar = worst_gstar.max((d - g.conjugate(v[0])).abs());
        }
        let mid = midpoint_convexity(&GridFunction::new(dual, diff)?, 1e-6)?;
        worst_mid = worst_mid.min(mid.worst_margin);
        if !mid.holds() {
            convex_fail += 1;
            res.add_report(format!("midpoint_convexity(instance{i})"), mid);
        }
        let sm = check_aniso_smooth(&f, pair, &anchors, &probes, 1e-8)?;
        if !sm.holds() {
            smooth_fail += 1;
            res.add_report(format!("a_smooth(instance{i})"), sm);
        }
    }
    res.put("instances", instances as f64);
    res.put("midpoint_worst_margin", worst_mid);
    res.put("conjugate_difference_vs_g_star", worst_gstar);
    res.put("convexity_failures", convex_fail as f64);
    res.put("smoothness_failures", smooth_fail as f64);
    res.expect("conjugate_difference_convex", convex_fail == 0, format!("{convex_fail} failures, worst margin {worst_mid}"));
    res.expect("a_smooth", smooth_fail == 0, format!("{smooth_fail} failures"));
    Ok(res.finish())
}

pub fn run_saddle_property(seed: u64, instances: usize) -> Result<ScenarioResult> {
    let mut res = ScenarioResult::new("saddle_property");
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let pairs = [LegendrePair::quadratic(1.0, 1)?, LegendrePair::cubic_abs()];
    let x_plan = SamplingPlan::grid1(-8.0, 8.0, 1601);
    let y_plan = SamplingPlan::grid1(-2.0, 2.0, 401);
    let v_plan = SamplingPlan::grid1(-3.0, 3.0, 21);
    let (mut failures, mut worst_ratio) = (0usize, 0.0f64);
    for i in 0..instances {
        let pair = &pairs[i % pairs.len()];
        let m = rng.gen_range(2..=4);
        // Shifts on the dual grid so that f is exactly Φ-convex there.
        let shifts = (0..m).map(|_| vec![rng.gen_range(-8i32..=8) as f64 / 4.0]).collect();
        let offsets = (0..m).map(|_| rng.gen_range(-1.0..1.0)).collect();
        let f = MaxOfShifts::new(pair.clone(), 1.0, shifts, offsets)?.function();
        let probe = SaddleProbe::new(&f, pair, &x_plan, &y_plan)?;
        let tol = probe.grid_tolerance();
        let sweep = probe.sweep(&v_plan)?;
        let ratio = sweep.max_abs_gap / tol;
        worst_ratio = worst_ratio.max(ratio);
        res.put(format!("instance{i}_max_abs_gap"), sweep.max_abs_gap);
        res.put(format!("instance{i}_grid_tolerance"), tol);
        if ratio > 5.0 {
            failures += 1;
        }
    }
    res.put("worst_gap_to_tolerance_ratio", worst_ratio);
    res.expect("gaps_within_5x_grid_tolerance", failures == 0, format!("{failures} instances exceed; worst ratio {worst_ratio}"));
    Ok(res.finish())
}

/// Named smooth instances with their reference pair and start point.
pub fn descent_corpus() -> Result<Vec<(&'static str, ScalarFunction, LegendrePair, Vec<f64>)>> {
    let quad = LegendrePair::quadratic(1.0, 1)?;
    Ok(vec![
        ("half_square", ScalarFunction::parse("0.5*x1^2")?, quad.clone(), vec![7.0]),
        ("box_three_halves", shift_vs_tilt_function(), LegendrePair::three_halves(), vec![5.0]),
        (
            "piecewise_linear_cubic",
            PiecewiseLinear::new(&[(-1.0, 0.0), (0.5, 0.2), (2.0, -1.0)])?.inf_conv(&LegendrePair::cubic_abs())?,
            LegendrePair::cubic_abs(),
            vec![4.0],
        ),
        ("piecewise_linear_quadratic", PiecewiseLinear::new(&[(-2.0, 1.0), (0.0, 0.0), (1.5, -2.0)])?.inf_conv(&quad)?, quad, vec![-6.0]),
        (
            "log_cosh_2d",
            ScalarFunction::parse("log(exp(x1 - 1) + exp(1 - x1)) + log(exp(x2 + 0.5) + exp(-x2 - 0.5))")?,
            LegendrePair::quadratic(1.0, 2)?,
            vec![3.0, -2.0],
        ),
    ])
}

pub fn run_descent_corpus() -> Result<ScenarioResult> {
    let mut res = ScenarioResult::new("descent_corpus");
    for (name, f, pair, x0) in descent_corpus()? {
        let n = pair.dim();
        let (anchors, probes) = if n == 1 {
            (SamplingPlan::grid1(-8.0, 8.0, 81), SamplingPlan::grid1(-12.0, 12.0, 241))
        } else {
            (SamplingPlan::grid(vec![-4.0; 2], vec![4.0; 2], vec![21, 21])?, SamplingPlan::grid(vec![-6.0; 2], vec![6.0; 2], vec![41, 41])?)
        };
        let cert = check_aniso_smooth(&f, &pair, &anchors, &probes, 1e-8)?;
        res.expect_verdict(format!("{name}_certified_a_smooth"), &cert, Verdict::Holds);
        res.add_report(format!("a_smooth({name})"), cert);
        let trace = dual_preconditioned_descent(&f, &pair, &x0, &DescentOptions::default())?;
        let (max_res, grad) = (trace.max_residual(), *trace.gradient_norms.last().unwrap_or(&f64::NAN));
        let steps = trace.iterates.len() - 1;
        res.put(format!("{name}_iterations"), steps as f64);
        res.put(format!("{name}_max_residual"), if steps == 0 { 0.0 } else { max_res });
        res.put(format!("{name}_final_gradient_norm"), grad);
        let ok = trace.status == DescentStatus::Converged && trace.residuals.iter().all(|r| *r <= 1e-10) && grad <= 1e-6;
        res.expect(format!("{name}_sufficient_descent"), ok, format!("{:?} after {steps} steps, max residual {max_res}, gradient {grad}", trace.status));
        res.artifact(&format!("descent_{name}.csv"), trace.to_csv());
    }
    Ok(res.finish())
}

/// Function/reference/grid combinations for the envelope identities.
pub fn identity_combinations() -> Result<Vec<(&'static str, ScalarFunction, LegendrePair, SamplingPlan, Vec<Identity>)>> {
    let quad = LegendrePair::quadratic(1.0, 1)?;
    let moreau = Identity::MOREAU.to_vec();
    let klee = Identity::KLEE.to_vec();
    Ok(vec![
        ("abs_cubic", ScalarFunction::parse("abs(x1)")?, LegendrePair::cubic_abs(), SamplingPlan::grid1(-4.0, 4.0, 4001), moreau.clone()),
        ("tilted_square_quadratic", smooth1("0.5*x^2 + x", |x| 0.5 * x * x + x, |x| x + 1.0), quad.clone(), SamplingPlan::grid1(-4.0, 4.0, 4001), moreau.clone()),
        ("point_indicator_three_halves", indicator(&[0.0], &[0.0])?, LegendrePair::three_halves(), SamplingPlan::grid1(-2.0, 2.0, 4001), moreau),
        ("quartic_cubic", smooth1("x^4", |x| x.powi(4), |x| 4.0 * x.powi(3)), LegendrePair::cubic_abs(), SamplingPlan::grid1(-3.0, 3.0, 4001), klee.clone()),
        ("square_quadratic", smooth1("x^2", |x| x * x, |x| 2.0 * x), quad, SamplingPlan::grid1(-3.0, 3.0, 4001), klee.clone()),
        ("square_three_halves", smooth1("x^2", |x| x * x, |x| 2.0 * x), LegendrePair::three_halves(), SamplingPlan::grid1(-3.0, 3.0, 4001), klee),
    ])
}

pub fn run_moreau_klee_identities() -> Result<ScenarioResult> {
    let mut res = ScenarioResult::new("moreau_klee_identities");
    for (name, g, pair, plan, ids) in identity_combinations()? {
        let opts = IdentityOptions { identities: ids, ..IdentityOptions::default() };
        let rep = verify_moreau_klee_identities(&g, &pair, &plan, &opts)?;
        for c in &rep.identities {
            let key = format!("{name}_{}", c.identity.name());
            res.put(format!("{key}_coarse"), c.coarse);
            res.put(format!("{key}_fine"), c.fine);
            res.expect_verdict(key.clone(), &c.report, Verdict::Holds);
            res.add_report(key, c.report.clone());
        }
    }
    Ok(res.finish())
}

#[cfg(test)]
mod tests;
