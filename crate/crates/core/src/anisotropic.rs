//! Anisotropic convexity and smoothness certificates, Φ-subdifferentials via
//! the resolvent identity, and dual space preconditioned descent.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::conjugacy::{check_phi_subgradient, phi_conjugate_full, Coupling, Side};
use crate::error::{check_dim, Error, Result};
use crate::funcs::{LegendrePair, ScalarFunction, SubgradientPolicy};
use crate::io::{coord_names, Csv};
use crate::report::{CheckReport, MarginTracker, Witness, DEFAULT_TOLERANCE};
use crate::sampling::SamplingPlan;

/// Inputs of the anisotropic inequality checker.
#[derive(Clone)]
pub struct AnisoCheckSpec {
    pub f: ScalarFunction,
    pub pair: LegendrePair,
    /// `+1` for a-strong, `−1` for a-weak convexity.
    pub r: f64,
    pub anchors: SamplingPlan,
    pub probes: SamplingPlan,
    pub policy: SubgradientPolicy,
    pub tolerance: f64,
    /// Adds a coarse ring of far probes around the anchors.
    pub far_field: bool,
}

impl AnisoCheckSpec {
    pub fn new(f: ScalarFunction, pair: LegendrePair, r: f64, anchors: SamplingPlan, probes: SamplingPlan) -> Result<Self> {
        let spec = AnisoCheckSpec {
            f,
            pair,
            r,
            anchors,
            probes,
            policy: SubgradientPolicy::default(),
            tolerance: DEFAULT_TOLERANCE,
            far_field: true,
        };
        spec.validate()?;
        Ok(spec)
    }

    pub fn with_policy(mut self, policy: SubgradientPolicy) -> Self {
        self.policy = policy;
        self
    }

    pub fn with_tolerance(mut self, tolerance: f64) -> Self {
        self.tolerance = tolerance;
        self
    }

    pub fn with_far_field(mut self, far_field: bool) -> Self {
        self.far_field = far_field;
        self
    }

    fn validate(&self) -> Result<()> {
        if self.r != 1.0 && self.r != -1.0 {
            return Err(Error::InvalidParameter(format!("r must be +1 or -1, got {}", self.r)));
        }
        if self.anchors.is_empty() {
            return Err(Error::EmptyPlan);
        }
        let n = self.pair.dim();
        check_dim(n, self.f.arity())?;
        check_dim(n, self.anchors.dim())?;
        if !self.probes.is_empty() {
            check_dim(n, self.probes.dim())?;
        }
        Ok(())
    }

    /// Probe set: the probes, the anchors and, optionally, the far-field ring.
    pub fn probe_points(&self) -> Vec<Vec<f64>> {
        let mut pts = self.probes.points_vec();
        pts.extend(self.anchors.points_vec());
        if self.far_field {
            pts.extend(far_field_ring(&self.anchors));
        }
        pts
    }
}

/// Ring of radius `10·max(span, 1)` around the anchor centroid.
pub fn far_field_ring(anchors: &SamplingPlan) -> Vec<Vec<f64>> {
    let (lo, hi) = anchors.bounds();
    let n = lo.len();
    let span = lo.iter().zip(&hi).map(|(a, b)| b - a).fold(0.0, f64::max);
    let radius = 10.0 * span.max(1.0);
    let center: Vec<f64> = lo.iter().zip(&hi).map(|(a, b)| 0.5 * (a + b)).collect();
    match n {
        2 => (0..32)
            .map(|k| {
                let t = std::f64::consts::TAU * k as f64 / 32.0;
                vec![center[0] + radius * t.cos(), center[1] + radius * t.sin()]
            })
            .collect(),
        _ => (0..n)
            .flat_map(|i| {
                [-1.0, 1.0].map(|s| {
                    let mut p = center.clone();
                    p[i] += s * radius;
                    p
                })
            })
            .collect(),
    }
}

/// `f(x) − f(x̄) − rφ(x − x̄ + ∇φ*(r v̄)) + rφ(∇φ*(r v̄))`.
pub fn aniso_margin(pair: &LegendrePair, r: f64, f_x: f64, f_bar: f64, x: &[f64], x_bar: &[f64], v_bar: &[f64]) -> f64 {
    let rv: Vec<f64> = v_bar.iter().map(|t| r * t).collect();
    let w = pair.grad_phi_star(&rv);
    let z: Vec<f64> = x.iter().zip(x_bar).zip(&w).map(|((a, b), c)| a - b + c).collect();
    f_x - f_bar - r * pair.phi(&z) + r * pair.phi(&w)
}

struct Anchor {
    x: Vec<f64>,
    f: f64,
    v: Vec<f64>,
    w: Vec<f64>,
    offset: f64,
}

fn anchored(spec_f: &ScalarFunction, pair: &LegendrePair, r: f64, anchors: &[Vec<f64>], policy: &SubgradientPolicy) -> (Vec<Anchor>, u64) {
    let mut out = Vec::new();
    let mut skipped = 0;
    for x in anchors {
        let f = spec_f.evaluate(x);
        let grads = spec_f.gradient(x);
        if !f.is_finite() || grads.is_empty() {
            skipped += 1;
            continue;
        }
        for v in policy.expand(&grads) {
            let rv: Vec<f64> = v.iter().map(|t| r * t).collect();
            let w = pair.grad_phi_star(&rv);
            let offset = r * pair.phi(&w);
            out.push(Anchor { x: x.clone(), f, v, w, offset });
        }
    }
    (out, skipped)
}

fn scan(pair: &LegendrePair, r: f64, anchors: &[Anchor], probes: &[Vec<f64>], f_probes: &[f64]) -> MarginTracker {
    let trackers: Vec<MarginTracker> = anchors
        .par_iter()
        .map(|a| {
            let mut t = MarginTracker::new();
            let mut z = vec![0.0; a.x.len()];
            for (x, fx) in probes.iter().zip(f_probes) {
                if !fx.is_finite() {
                    continue;
                }
                for j in 0..z.len() {
                    z[j] = x[j] - a.x[j] + a.w[j];
                }
                let m = fx - a.f - r * pair.phi(&z) + a.offset;
                t.record(m, || Witness { point: x.clone(), anchor: Some(a.x.clone()), subgradient: Some(a.v.clone()), dual: None });
            }
            t
        })
        .collect();
    MarginTracker::merge_all(trackers)
}

/// Tests the anisotropic inequality for every anchor, selected subgradient
/// and probe. Anchors without subgradients are skipped and counted.
pub fn check_aniso_convexity(spec: &AnisoCheckSpec) -> Result<CheckReport> {
    spec.validate()?;
    let (anchors, skipped) = anchored(&spec.f, &spec.pair, spec.r, &spec.anchors.points_vec(), &spec.policy);
    let probes = spec.probe_points();
    let f_probes: Vec<f64> = probes.par_iter().map(|x| spec.f.evaluate(x)).collect();
    let mut t = scan(&spec.pair, spec.r, &anchors, &probes, &f_probes);
    t.skipped += skipped;
    let mut rep = t.report(spec.tolerance);
    if skipped > 0 {
        rep.notes.push(format!("{skipped} anchors without subgradients skipped"));
    }
    Ok(rep)
}

/// Tests the anisotropic descent inequality for `f` and its mirror for `−f`
/// (both `f` and `−f` a-weakly convex) on every anchor/probe pair.
pub fn check_aniso_smooth(
    f: &ScalarFunction,
    pair: &LegendrePair,
    anchors: &SamplingPlan,
    probes: &SamplingPlan,
    tolerance: f64,
) -> Result<CheckReport> {
    check_dim(pair.dim(), f.arity())?;
    check_dim(pair.dim(), anchors.dim())?;
    check_dim(pair.dim(), probes.dim())?;
    if anchors.is_empty() {
        return Err(Error::EmptyPlan);
    }
    let anchor_pts = anchors.points_vec();
    let nonsmooth = anchor_pts.iter().filter(|x| f.evaluate(x).is_finite() && f.smooth_gradient(x).is_none()).count();
    let smooth: Vec<Vec<f64>> = anchor_pts.into_iter().filter(|x| f.smooth_gradient(x).is_some()).collect();
    let neg = f.scaled(-1.0);
    let (a_pos, _) = anchored(f, pair, -1.0, &smooth, &SubgradientPolicy::Vertices);
    let (a_neg, _) = anchored(&neg, pair, -1.0, &smooth, &SubgradientPolicy::Vertices);
    let mut pts = probes.points_vec();
    pts.extend(smooth.iter().cloned());
    let fp: Vec<f64> = pts.par_iter().map(|x| f.evaluate(x)).collect();
    let fn_: Vec<f64> = fp.iter().map(|v| -v).collect();
    let mut t = scan(pair, -1.0, &a_pos, &pts, &fp).merge(scan(pair, -1.0, &a_neg, &pts, &fn_));
    t.skipped += nonsmooth as u64;
    let rep = t.report(tolerance);
    Ok(if nonsmooth > 0 { rep.inconclusive_unless_violated(format!("{nonsmooth} anchors are not smooth points")) } else { rep })
}

/// A Φ-subgradient candidate `ȳ = x̄ − ∇φ*(r v̄)` with its validation.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PhiCandidate {
    pub subgradient: Vec<f64>,
    pub candidate: Vec<f64>,
    pub report: CheckReport,
}

/// Candidates of `∂_Φ f(x̄)` for `Φ(x, y) = rφ(x − y)`, each validated by the
/// Φ-subgradient inequality over the probe plan.
pub fn phi_subdifferential(
    f: &ScalarFunction,
    pair: &LegendrePair,
    r: f64,
    x_bar: &[f64],
    policy: &SubgradientPolicy,
    probes: &SamplingPlan,
    tolerance: f64,
) -> Result<Vec<PhiCandidate>> {
    check_dim(pair.dim(), x_bar.len())?;
    check_dim(pair.dim(), f.arity())?;
    let coupling = Coupling::phi_shift(pair, r);
    policy
        .expand(&f.gradient(x_bar))
        .into_iter()
        .map(|v| {
            let rv: Vec<f64> = v.iter().map(|t| r * t).collect();
            let y: Vec<f64> = x_bar.iter().zip(pair.grad_phi_star(&rv)).map(|(a, b)| a - b).collect();
            let report = check_phi_subgradient(f, &coupling, x_bar, &y, probes, tolerance)?;
            Ok(PhiCandidate { subgradient: v, candidate: y, report })
        })
        .collect()
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum DescentStatus {
    Converged,
    MaxIter,
    Diverged,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DescentTrace {
    pub iterates: Vec<Vec<f64>>,
    pub values: Vec<f64>,
    /// `f(xᵗ⁺¹) − f(xᵗ) + φ(xᵗ − xᵗ⁺¹)` for every step.
    pub residuals: Vec<f64>,
    pub gradient_norms: Vec<f64>,
    pub status: DescentStatus,
}

impl DescentTrace {
    pub fn max_residual(&self) -> f64 {
        self.residuals.iter().copied().fold(f64::NEG_INFINITY, f64::max)
    }

    /// Rows `(iter, x…, value, gradient_norm, residual)`; the residual of
    /// row `t` is that of the step into `xᵗ` (`nan` for the start).
    pub fn to_csv(&self) -> Csv {
        let n = self.iterates.first().map_or(0, Vec::len);
        let mut header = vec!["iter".to_string()];
        header.extend(coord_names("x", n));
        header.extend(["value", "gradient_norm", "residual"].map(String::from));
        let mut csv = Csv::new(header).with_index_column();
        for (t, x) in self.iterates.iter().enumerate() {
            let mut row = vec![t as f64];
            row.extend(x);
            row.push(self.values[t]);
            row.push(self.gradient_norms.get(t).copied().unwrap_or(f64::NAN));
            row.push(if t == 0 { f64::NAN } else { self.residuals[t - 1] });
            csv.push(row);
        }
        csv
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct DescentOptions {
    pub max_iter: usize,
    pub stop_tol: f64,
    /// Consecutive increases that flag divergence.
    pub divergence_window: usize,
    /// An increase counts when it exceeds this fraction of `max(|f(x⁰)|, 1)`.
    pub divergence_fraction: f64,
}

impl Default for DescentOptions {
    fn default() -> Self {
        DescentOptions { max_iter: 500, stop_tol: 1e-6, divergence_window: 5, divergence_fraction: 0.1 }
    }
}

/// Runs `xᵗ⁺¹ = xᵗ − ∇φ*(∇f(xᵗ))` from `x0`.
pub fn dual_preconditioned_descent(f: &ScalarFunction, pair: &LegendrePair, x0: &[f64], options: &DescentOptions) -> Result<DescentTrace> {
    check_dim(pair.dim(), f.arity())?;
    check_dim(pair.dim(), x0.len())?;
    if !pair.is_normalized() {
        return Err(Error::InvalidParameter(format!("{} is not normalized at the origin", pair.label())));
    }
    let mut x = x0.to_vec();
    let mut fx = f.evaluate(&x);
    if !fx.is_finite() {
        return Err(Error::Domain(format!("f(x0) = {fx}")));
    }
    let scale = options.divergence_fraction * fx.abs().max(1.0);
    let mut trace = DescentTrace { iterates: vec![x.clone()], values: vec![fx], residuals: Vec::new(), gradient_norms: Vec::new(), status: DescentStatus::MaxIter };
    let mut rising = 0;
    for iter in 0..=options.max_iter {
        let g = f.smooth_gradient(&x).ok_or_else(|| Error::Gradient(x.clone()))?;
        let gn = crate::norm(&g);
        trace.gradient_norms.push(gn);
        if gn <= options.stop_tol {
            trace.status = DescentStatus::Converged;
            break;
        }
        if iter == options.max_iter {
            break;
        }
        let step = pair.grad_phi_star(&g);
        let next: Vec<f64> = x.iter().zip(&step).map(|(a, b)| a - b).collect();
        let f_next = f.evaluate(&next);
        let residual = f_next - fx + pair.phi(&step);
        rising = if f_next - fx > scale { rising + 1 } else { 0 };
        trace.iterates.push(next.clone());
        trace.values.push(f_next);
        trace.residuals.push(residual);
        x = next;
        fx = f_next;
        if !fx.is_finite() || x.iter().any(|t| !t.is_finite()) || rising >= options.divergence_window {
            trace.status = DescentStatus::Diverged;
            break;
        }
    }
    Ok(trace)
}

/// Inequality verdict and grid biconjugate verdict for `Φ(x, y) = rφ(x − y)`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PhiConvexityComparison {
    pub inequality: CheckReport,
    pub biconjugate: CheckReport,
    pub agree: bool,
    pub grid_tolerance: f64,
}

#[derive(Debug, Clone, PartialEq, Default)]
pub struct ViaPhiOptions {
    /// Overrides the biconjugate tolerance `1e-8 + n·C·h²/8`.
    pub grid_tolerance: Option<f64>,
    /// Biconjugate comparison is restricted to this central fraction of the primal box.
    pub eval_fraction: Option<f64>,
    pub tolerance: Option<f64>,
}

/// Cross-validates the anisotropic inequality checker against the grid test
/// `f^{ΦΦ} = f`.
pub fn check_aniso_via_phi_convexity(
    f: &ScalarFunction,
    pair: &LegendrePair,
    r: f64,
    primal: &SamplingPlan,
    dual: &SamplingPlan,
    options: &ViaPhiOptions,
) -> Result<PhiConvexityComparison> {
    let tol = options.tolerance.unwrap_or(DEFAULT_TOLERANCE);
    let fraction = options.eval_fraction.unwrap_or(0.5);
    let (lo, hi) = primal.bounds();
    let eval_lo: Vec<f64> = lo.iter().zip(&hi).map(|(a, b)| 0.5 * (a + b) - 0.5 * fraction * (b - a)).collect();
    let eval_hi: Vec<f64> = lo.iter().zip(&hi).map(|(a, b)| 0.5 * (a + b) + 0.5 * fraction * (b - a)).collect();
    let inside = |x: &[f64]| x.iter().zip(eval_lo.iter().zip(&eval_hi)).all(|(t, (a, b))| *a - 1e-12 <= *t && *t <= *b + 1e-12);
    let central: Vec<Vec<f64>> = primal.points_vec().into_iter().filter(|x| inside(x)).collect();
    let anchors = SamplingPlan::points(central)?;
    let spec = AnisoCheckSpec::new(f.clone(), pair.clone(), r, anchors, primal.clone())?.with_tolerance(tol).with_far_field(false);
    let inequality = check_aniso_convexity(&spec)?;

    let coupling = Coupling::phi_shift(pair, r);
    let first = phi_conjugate_full(f, &coupling, primal, dual, Side::Left)?;
    let second = phi_conjugate_full(&first.grid, &coupling, dual, primal, Side::Right)?;
    let grid_tolerance = options.grid_tolerance.unwrap_or_else(|| {
        let h = dual.spacing().map_or(0.0, |s| s.into_iter().fold(0.0, f64::max));
        let (dlo, dhi) = dual.bounds();
        let zlo: Vec<f64> = lo.iter().zip(&dhi).map(|(a, b)| a - b).collect();
        let zhi: Vec<f64> = hi.iter().zip(&dlo).map(|(a, b)| a - b).collect();
        let c = pair.curvature_bound(&zlo, &zhi, h.max(1e-6));
        1e-8 + lo.len() as f64 * c * h * h / 8.0
    });
    let xs = primal.points_vec();
    let mut t = MarginTracker::new();
    let mut boundary = 0;
    for (k, x) in xs.iter().enumerate() {
        if !inside(x) {
            continue;
        }
        let fx = f.evaluate(x);
        if !fx.is_finite() {
            t.skip();
            continue;
        }
        if dual.is_boundary_index(second.argmax[k]) {
            boundary += 1;
        }
        t.record(-(fx - second.grid.values[k]).abs(), || Witness { point: x.clone(), ..Default::default() });
    }
    let mut biconjugate = t.report(grid_tolerance);
    if boundary > 0 {
        biconjugate = biconjugate.inconclusive_unless_violated(format!("{boundary} suprema attained on the dual grid boundary"));
    }
    let agree = inequality.verdict == biconjugate.verdict;
    Ok(PhiConvexityComparison { inequality, biconjugate, agree, grid_tolerance })
}
