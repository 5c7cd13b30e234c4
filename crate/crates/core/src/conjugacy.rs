//! Brute-force discrete conjugation, Φ-conjugates for Bregman-type
//! couplings, biconjugate hulls, Φ-subgradient tests and saddle probes.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{check_dim, Error, Result};
use crate::funcs::{LegendrePair, ScalarFunction};
use crate::io::{coord_names, ext_real_vec, Csv};
use crate::report::{CheckReport, MarginTracker, Witness};
use crate::sampling::SamplingPlan;

/// Values of a function on the points of a sampling plan.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GridFunction {
    pub plan: SamplingPlan,
    #[serde(with = "ext_real_vec")]
    pub values: Vec<f64>,
}

impl GridFunction {
    pub fn new(plan: SamplingPlan, values: Vec<f64>) -> Result<Self> {
        check_dim(plan.len(), values.len())?;
        if !values.iter().any(|v| v.is_finite()) {
            return Err(Error::Improper);
        }
        if values.iter().any(|v| v.is_nan() || *v == f64::NEG_INFINITY) {
            return Err(Error::InvalidParameter("grid values must be finite or +inf".into()));
        }
        Ok(GridFunction { plan, values })
    }

    pub fn sample(f: &ScalarFunction, plan: &SamplingPlan) -> Result<Self> {
        check_dim(f.arity(), plan.dim())?;
        let values = plan.points_vec().par_iter().map(|x| f.evaluate(x)).collect();
        Self::new(plan.clone(), values)
    }

    pub fn points(&self) -> Vec<Vec<f64>> {
        self.plan.points_vec()
    }

    /// Smallest finite value with its index.
    pub fn min(&self) -> (usize, f64) {
        self.values
            .iter()
            .enumerate()
            .filter(|(_, v)| v.is_finite())
            .fold((0, f64::INFINITY), |b, (i, v)| if *v < b.1 { (i, *v) } else { b })
    }

    /// Largest finite value with its index.
    pub fn max(&self) -> (usize, f64) {
        self.values
            .iter()
            .enumerate()
            .filter(|(_, v)| v.is_finite())
            .fold((0, f64::NEG_INFINITY), |b, (i, v)| if *v > b.1 { (i, *v) } else { b })
    }

    /// CSV with coordinate columns followed by `value`.
    pub fn to_csv(&self) -> Csv {
        let mut header = coord_names("x", self.plan.dim());
        header.push("value".into());
        let mut csv = Csv::new(header);
        for (p, v) in self.points().into_iter().zip(&self.values) {
            let mut row = p;
            row.push(*v);
            csv.push(row);
        }
        csv
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string(self).expect("grid function serializes")
    }

    /// Multilinear interpolation on grid plans; `+∞` outside the box.
    pub fn interpolate(&self, x: &[f64]) -> f64 {
        let (Some(axes), SamplingPlan::Grid { counts, .. }) = (self.plan.axes(), &self.plan) else {
            return f64::NAN;
        };
        let n = counts.len();
        let mut base = Vec::with_capacity(n);
        let mut frac = Vec::with_capacity(n);
        for d in 0..n {
            let a = &axes[d];
            let c = counts[d];
            if x[d] < a[0] || x[d] > a[c - 1] {
                return f64::INFINITY;
            }
            if c == 1 {
                base.push(0);
                frac.push(0.0);
                continue;
            }
            let h = (a[c - 1] - a[0]) / (c - 1) as f64;
            let k = (((x[d] - a[0]) / h).floor() as usize).min(c - 2);
            base.push(k);
            frac.push(((x[d] - a[k]) / h).clamp(0.0, 1.0));
        }
        let mut total = 0.0;
        for corner in 0..(1usize << n) {
            let mut w = 1.0;
            let mut idx = 0;
            for d in 0..n {
                let bit = (corner >> d) & 1;
                let k = (base[d] + bit).min(counts[d] - 1);
                w *= if bit == 1 { frac[d] } else { 1.0 - frac[d] };
                idx = idx * counts[d] + k;
            }
            if w > 0.0 {
                total += w * self.values[idx];
            }
        }
        total
    }
}

/// Either a function to sample or precomputed grid values.
#[derive(Debug, Clone, Copy)]
pub enum Source<'a> {
    Function(&'a ScalarFunction),
    Grid(&'a GridFunction),
}

impl<'a> From<&'a ScalarFunction> for Source<'a> {
    fn from(f: &'a ScalarFunction) -> Self {
        Source::Function(f)
    }
}

impl<'a> From<&'a GridFunction> for Source<'a> {
    fn from(g: &'a GridFunction) -> Self {
        Source::Grid(g)
    }
}

impl Source<'_> {
    fn values_on(&self, plan: &SamplingPlan, points: &[Vec<f64>]) -> Result<Vec<f64>> {
        match self {
            Source::Function(f) => {
                check_dim(f.arity(), plan.dim())?;
                Ok(points.par_iter().map(|x| f.evaluate(x)).collect())
            }
            Source::Grid(g) => {
                if &g.plan != plan {
                    return Err(Error::Config("grid function is defined on a different plan".into()));
                }
                Ok(g.values.clone())
            }
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum CouplingKind {
    InnerProduct,
    PlusPhiShift,
    MinusPhiShift,
    PlusBregman,
    MinusBregman,
}

impl CouplingKind {
    pub fn parse(s: &str) -> Result<Self> {
        Ok(match s {
            "inner_product" => CouplingKind::InnerProduct,
            "plus_phi_shift" => CouplingKind::PlusPhiShift,
            "minus_phi_shift" => CouplingKind::MinusPhiShift,
            "plus_bregman" => CouplingKind::PlusBregman,
            "minus_bregman" => CouplingKind::MinusBregman,
            _ => return Err(Error::Config(format!("unknown coupling '{s}'"))),
        })
    }
}

/// A real-valued pairing Φ(x, y).
#[derive(Debug, Clone, PartialEq)]
pub struct Coupling {
    pub kind: CouplingKind,
    pub pair: Option<LegendrePair>,
}

impl Coupling {
    pub fn new(kind: CouplingKind, pair: Option<LegendrePair>) -> Result<Self> {
        if kind != CouplingKind::InnerProduct && pair.is_none() {
            return Err(Error::Config("this coupling needs a reference pair".into()));
        }
        Ok(Coupling { kind, pair })
    }

    pub fn inner_product() -> Self {
        Coupling { kind: CouplingKind::InnerProduct, pair: None }
    }

    pub fn phi_shift(pair: &LegendrePair, r: f64) -> Self {
        let kind = if r >= 0.0 { CouplingKind::PlusPhiShift } else { CouplingKind::MinusPhiShift };
        Coupling { kind, pair: Some(pair.clone()) }
    }

    #[inline]
    pub fn evaluate(&self, x: &[f64], y: &[f64]) -> f64 {
        let shift = |p: &LegendrePair| p.phi(&x.iter().zip(y).map(|(a, b)| a - b).collect::<Vec<_>>());
        match (self.kind, &self.pair) {
            (CouplingKind::InnerProduct, _) => crate::dot(x, y),
            (CouplingKind::PlusPhiShift, Some(p)) => shift(p),
            (CouplingKind::MinusPhiShift, Some(p)) => -shift(p),
            (CouplingKind::PlusBregman, Some(p)) => p.bregman(x, y),
            (CouplingKind::MinusBregman, Some(p)) => -p.bregman(x, y),
            _ => f64::NAN,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "snake_case")]
pub enum Side {
    #[default]
    Left,
    Right,
}

/// A conjugate on the output grid together with the attaining input indices.
#[derive(Debug, Clone, PartialEq)]
pub struct Conjugate {
    pub grid: GridFunction,
    pub argmax: Vec<usize>,
    /// Interior output points whose supremum is attained on the input-grid boundary.
    pub boundary_hits: usize,
}

/// `out(w) = max_i pairing(inputs[i], w) − values[i]` over finite values.
pub(crate) fn sup_transform(
    values: &[f64],
    inputs: &[Vec<f64>],
    outputs: &[Vec<f64>],
    pairing: impl Fn(&[f64], &[f64]) -> f64 + Sync,
) -> Result<(Vec<f64>, Vec<usize>)> {
    let finite: Vec<usize> = (0..values.len()).filter(|&i| values[i].is_finite()).collect();
    if finite.is_empty() {
        return Err(Error::Improper);
    }
    let res: Vec<(f64, usize)> = outputs
        .par_iter()
        .map(|w| {
            let mut best = (f64::NEG_INFINITY, finite[0]);
            for &i in &finite {
                let v = pairing(&inputs[i], w) - values[i];
                if v > best.0 {
                    best = (v, i);
                }
            }
            best
        })
        .collect();
    Ok(res.into_iter().unzip())
}

fn finish(plan_in: &SamplingPlan, plan_out: &SamplingPlan, vals: Vec<f64>, argmax: Vec<usize>) -> Result<Conjugate> {
    let boundary_hits = argmax
        .iter()
        .enumerate()
        .filter(|(k, &i)| !plan_out.is_boundary_index(*k) && plan_in.is_boundary_index(i))
        .count();
    Ok(Conjugate { grid: GridFunction::new(plan_out.clone(), vals)?, argmax, boundary_hits })
}

/// `f*(v) = max_{x ∈ primal} ⟨x, v⟩ − f(x)` for every `v` in the dual plan.
pub fn discrete_conjugate<'a>(f: impl Into<Source<'a>>, primal: &SamplingPlan, dual: &SamplingPlan) -> Result<GridFunction> {
    Ok(discrete_conjugate_full(f, primal, dual)?.grid)
}

pub fn discrete_conjugate_full<'a>(f: impl Into<Source<'a>>, primal: &SamplingPlan, dual: &SamplingPlan) -> Result<Conjugate> {
    phi_conjugate_full(f, &Coupling::inner_product(), primal, dual, Side::Left)
}

/// Φ-conjugate over the grid.
///
/// `Left`: `f^Φ(y) = max_{x ∈ primal} Φ(x, y) − f(x)` for `y` in `output`.
/// `Right`: `f^Φ(x) = max_{y ∈ primal} Φ(x, y) − f(y)` for `x` in `output`.
pub fn phi_conjugate<'a>(
    f: impl Into<Source<'a>>,
    coupling: &Coupling,
    primal: &SamplingPlan,
    output: &SamplingPlan,
    side: Side,
) -> Result<GridFunction> {
    Ok(phi_conjugate_full(f, coupling, primal, output, side)?.grid)
}

pub fn phi_conjugate_full<'a>(
    f: impl Into<Source<'a>>,
    coupling: &Coupling,
    primal: &SamplingPlan,
    output: &SamplingPlan,
    side: Side,
) -> Result<Conjugate> {
    check_dim(primal.dim(), output.dim())?;
    if let Some(p) = &coupling.pair {
        check_dim(p.dim(), primal.dim())?;
    }
    let inputs = primal.points_vec();
    let outputs = output.points_vec();
    let values = f.into().values_on(primal, &inputs)?;
    let (vals, arg) = match side {
        Side::Left => sup_transform(&values, &inputs, &outputs, |x, y| coupling.evaluate(x, y))?,
        Side::Right => sup_transform(&values, &inputs, &outputs, |y, x| coupling.evaluate(x, y))?,
    };
    finish(primal, output, vals, arg)
}

/// `f^{ΦΦ}` on the primal plan, through the dual plan.
pub fn phi_biconjugate<'a>(
    f: impl Into<Source<'a>>,
    coupling: &Coupling,
    primal: &SamplingPlan,
    dual: &SamplingPlan,
) -> Result<GridFunction> {
    let first = phi_conjugate(f, coupling, primal, dual, Side::Left)?;
    phi_conjugate(&first, coupling, dual, primal, Side::Right)
}

/// Tests `f(x) ≥ f(x̄) + Φ(x, ȳ) − Φ(x̄, ȳ)` at every plan point.
pub fn check_phi_subgradient(
    f: &ScalarFunction,
    coupling: &Coupling,
    x_bar: &[f64],
    y_bar: &[f64],
    plan: &SamplingPlan,
    tolerance: f64,
) -> Result<CheckReport> {
    check_dim(f.arity(), x_bar.len())?;
    check_dim(f.arity(), y_bar.len())?;
    check_dim(f.arity(), plan.dim())?;
    let fx_bar = f.evaluate(x_bar);
    if !fx_bar.is_finite() {
        return Err(Error::InvalidParameter("f(x̄) must be finite".into()));
    }
    let base = coupling.evaluate(x_bar, y_bar);
    let pts = plan.points_vec();
    let trackers: Vec<MarginTracker> = pts
        .par_chunks(256)
        .map(|chunk| {
            let mut t = MarginTracker::new();
            for x in chunk {
                let m = f.evaluate(x) - fx_bar - coupling.evaluate(x, y_bar) + base;
                t.record(m, || Witness {
                    point: x.clone(),
                    anchor: Some(x_bar.to_vec()),
                    subgradient: None,
                    dual: Some(y_bar.to_vec()),
                });
            }
            t
        })
        .collect();
    Ok(MarginTracker::merge_all(trackers).report(tolerance))
}

/// Midpoint convexity along every grid axis: `(f(a) + f(b))/2 − f(mid) ≥ −tol`.
pub fn midpoint_convexity(g: &GridFunction, tolerance: f64) -> Result<CheckReport> {
    let SamplingPlan::Grid { counts, .. } = &g.plan else {
        return Err(Error::Config("midpoint convexity needs a grid plan".into()));
    };
    let pts = g.points();
    let n = counts.len();
    let mut strides = vec![1usize; n];
    for d in (0..n.saturating_sub(1)).rev() {
        strides[d] = strides[d + 1] * counts[d + 1];
    }
    let mut t = MarginTracker::new();
    for k in 0..g.values.len() {
        let mut rem = k;
        let mut idx = vec![0usize; n];
        for d in (0..n).rev() {
            idx[d] = rem % counts[d];
            rem /= counts[d];
        }
        for d in 0..n {
            if idx[d] == 0 || idx[d] + 1 >= counts[d] {
                continue;
            }
            let (a, b) = (g.values[k - strides[d]], g.values[k + strides[d]]);
            if !(a.is_finite() && b.is_finite()) {
                t.skip();
                continue;
            }
            let m = 0.5 * (a + b) - g.values[k];
            t.record(m, || Witness { point: pts[k].clone(), ..Default::default() });
        }
    }
    Ok(t.report(tolerance))
}

/// `(f □ g)(x) = min_{y ∈ inner} f(x − y) + g(y)` on the output plan.
pub fn infimal_convolution(f: &ScalarFunction, g: &ScalarFunction, output: &SamplingPlan, inner: &SamplingPlan) -> Result<GridFunction> {
    check_dim(f.arity(), g.arity())?;
    check_dim(f.arity(), output.dim())?;
    check_dim(f.arity(), inner.dim())?;
    let ys = inner.points_vec();
    let gy: Vec<f64> = ys.iter().map(|y| g.evaluate(y)).collect();
    let vals = output
        .points_vec()
        .par_iter()
        .map(|x| {
            let mut best = f64::INFINITY;
            for (y, gv) in ys.iter().zip(&gy) {
                if gv.is_finite() {
                    let z: Vec<f64> = x.iter().zip(y).map(|(a, b)| a - b).collect();
                    best = best.min(f.evaluate(&z) + gv);
                }
            }
            best
        })
        .collect();
    GridFunction::new(output.clone(), vals)
}

/// Both sides of `sup_y h(x − y) − g(−y) = (h* − g*)*(x)` on a grid.
#[derive(Debug, Clone, PartialEq)]
pub struct HiriartUrruty {
    pub left: GridFunction,
    pub right: GridFunction,
    pub discrepancy: f64,
    pub report: CheckReport,
}

/// Evaluates the Hiriart-Urruty difference formula on `plan`, using `dual`
/// for the conjugate variable; the report compares both sides.
pub fn hiriart_urruty_transform(
    h: &LegendrePair,
    g: &ScalarFunction,
    plan: &SamplingPlan,
    dual: &SamplingPlan,
    tolerance: f64,
) -> Result<HiriartUrruty> {
    check_dim(h.dim(), plan.dim())?;
    check_dim(g.arity(), plan.dim())?;
    let xs = plan.points_vec();
    let gneg: Vec<f64> = xs.iter().map(|y| g.evaluate(&y.iter().map(|t| -t).collect::<Vec<_>>())).collect();
    let (left, _) = sup_transform(&gneg, &xs, &xs, |y, x| h.phi(&x.iter().zip(y).map(|(a, b)| a - b).collect::<Vec<_>>()))?;
    let g_grid = GridFunction::sample(g, plan)?;
    let g_star = discrete_conjugate(&g_grid, plan, dual)?;
    let vs = dual.points_vec();
    let diff: Vec<f64> = vs.iter().zip(&g_star.values).map(|(v, gs)| h.phi_star(v) - gs).collect();
    let (right, _) = sup_transform(&diff, &vs, &xs, |v, x| crate::dot(x, v))?;
    let mut t = MarginTracker::new();
    for ((x, l), r) in xs.iter().zip(&left).zip(&right) {
        if l.is_finite() || r.is_finite() {
            t.record(-(l - r).abs(), || Witness { point: x.clone(), ..Default::default() });
        }
    }
    let mut report = t.report(tolerance);
    let discrepancy = -report.worst_margin;
    if plan.axes().is_some() {
        let convex = midpoint_convexity(&g_grid, 1e-9)?;
        if convex.violated() {
            report = report.with_note("g is not midpoint convex on the grid");
            report.verdict = crate::report::Verdict::Inconclusive;
        }
    }
    Ok(HiriartUrruty {
        left: GridFunction::new(plan.clone(), left)?,
        right: GridFunction::new(plan.clone(), right)?,
        discrepancy,
        report,
    })
}

/// One evaluation of the two iterated problems of the tilted coupling
/// `⟨x, v̄⟩ − φ(x − y) + f^Φ(y)`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SaddleValue {
    pub v: Vec<f64>,
    pub sup_inf: f64,
    pub inf_sup: f64,
    pub gap: f64,
    pub x_star: Vec<f64>,
    pub y_star: Vec<f64>,
    pub boundary: bool,
}

/// Result of scanning v̄ over a plan.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SaddleSweep {
    pub values: Vec<SaddleValue>,
    pub max_gap: f64,
    pub max_gap_at: Vec<f64>,
    pub max_abs_gap: f64,
}

/// Precomputed `f^Φ` and `f^{ΦΦ}` for the coupling `Φ(x, y) = φ(x − y)`.
#[derive(Debug, Clone)]
pub struct SaddleProbe {
    pair: LegendrePair,
    x_plan: SamplingPlan,
    xs: Vec<Vec<f64>>,
    ys: Vec<Vec<f64>>,
    f_phi: Vec<f64>,
    f_phiphi: Vec<f64>,
    separable_axes: Option<Vec<Vec<f64>>>,
}

impl SaddleProbe {
    pub fn new(f: &ScalarFunction, pair: &LegendrePair, primal: &SamplingPlan, dual: &SamplingPlan) -> Result<Self> {
        check_dim(pair.dim(), primal.dim())?;
        let coupling = Coupling::phi_shift(pair, 1.0);
        let first = phi_conjugate(f, &coupling, primal, dual, Side::Left)?;
        let second = phi_conjugate(&first, &coupling, dual, primal, Side::Right)?;
        let separable_axes = if pair.is_separable() { primal.axes() } else { None };
        Ok(SaddleProbe {
            pair: pair.clone(),
            x_plan: primal.clone(),
            xs: primal.points_vec(),
            ys: dual.points_vec(),
            f_phi: first.values,
            f_phiphi: second.values,
            separable_axes,
        })
    }

    /// Discretization tolerance `1e-8 + n·C·h²/8`, with `h` the primal spacing
    /// and `C` a curvature bound of φ on `X − Y`.
    pub fn grid_tolerance(&self) -> f64 {
        let h = self.x_plan.spacing().map_or(0.0, |s| s.into_iter().fold(0.0, f64::max));
        let (xlo, xhi) = self.x_plan.bounds();
        let n = xlo.len();
        let (mut ylo, mut yhi) = (vec![f64::INFINITY; n], vec![f64::NEG_INFINITY; n]);
        for y in &self.ys {
            for i in 0..n {
                ylo[i] = ylo[i].min(y[i]);
                yhi[i] = yhi[i].max(y[i]);
            }
        }
        let zlo: Vec<f64> = xlo.iter().zip(&yhi).map(|(a, b)| a - b).collect();
        let zhi: Vec<f64> = xhi.iter().zip(&ylo).map(|(a, b)| a - b).collect();
        1e-8 + n as f64 * self.pair.curvature_bound(&zlo, &zhi, h.max(1e-6)) * h * h / 8.0
    }

    pub fn f_phi(&self) -> &[f64] {
        &self.f_phi
    }

    pub fn f_phiphi(&self) -> &[f64] {
        &self.f_phiphi
    }

    /// `max_{x ∈ X} ⟨x, v⟩ − φ(x − y)` with its maximizer.
    fn inner_sup(&self, v: &[f64], y: &[f64], g: &[f64]) -> (f64, Vec<f64>) {
        if let Some(axes) = &self.separable_axes {
            let mut total = 0.0;
            let mut arg = Vec::with_capacity(v.len());
            for (i, axis) in axes.iter().enumerate() {
                let c = axis.len();
                let obj = |t: f64| t * v[i] - self.pair.coordinate_phi(i, t - y[i]).unwrap_or(f64::NAN);
                let t_star = y[i] + g[i];
                let k = if c > 1 {
                    let h = (axis[c - 1] - axis[0]) / (c - 1) as f64;
                    ((t_star - axis[0]) / h).floor().clamp(0.0, (c - 1) as f64) as usize
                } else {
                    0
                };
                let mut best = (f64::NEG_INFINITY, axis[0]);
                for j in k.saturating_sub(2)..(k + 3).min(c) {
                    let val = obj(axis[j]);
                    if val > best.0 {
                        best = (val, axis[j]);
                    }
                }
                total += best.0;
                arg.push(best.1);
            }
            return (total, arg);
        }
        self.inner_sup_brute(v, y)
    }

    fn inner_sup_brute(&self, v: &[f64], y: &[f64]) -> (f64, Vec<f64>) {
        let mut best = (f64::NEG_INFINITY, 0);
        for (k, x) in self.xs.iter().enumerate() {
            let z: Vec<f64> = x.iter().zip(y).map(|(a, b)| a - b).collect();
            let val = crate::dot(x, v) - self.pair.phi(&z);
            if val > best.0 {
                best = (val, k);
            }
        }
        (best.0, self.xs[best.1].clone())
    }

    pub fn evaluate(&self, v: &[f64]) -> SaddleValue {
        let mut sup_inf = (f64::NEG_INFINITY, 0);
        for (k, (x, f2)) in self.xs.iter().zip(&self.f_phiphi).enumerate() {
            let val = crate::dot(x, v) - f2;
            if val > sup_inf.0 {
                sup_inf = (val, k);
            }
        }
        let g = self.pair.grad_phi_star(v);
        let mut inf_sup = (f64::INFINITY, 0, Vec::new());
        for (k, (y, f1)) in self.ys.iter().zip(&self.f_phi).enumerate() {
            let (s, arg) = self.inner_sup(v, y, &g);
            let val = f1 + s;
            if val < inf_sup.0 {
                inf_sup = (val, k, arg);
            }
        }
        let (lo, hi) = self.x_plan.bounds();
        let on_x_edge = |p: &[f64]| p.iter().zip(lo.iter().zip(&hi)).any(|(t, (a, b))| t == a || t == b);
        let boundary = self.x_plan.is_boundary_index(sup_inf.1) || on_x_edge(&inf_sup.2);
        SaddleValue {
            v: v.to_vec(),
            sup_inf: sup_inf.0,
            inf_sup: inf_sup.0,
            gap: inf_sup.0 - sup_inf.0,
            x_star: self.xs[sup_inf.1].clone(),
            y_star: self.ys[inf_sup.1].clone(),
            boundary,
        }
    }

    pub fn sweep(&self, v_plan: &SamplingPlan) -> Result<SaddleSweep> {
        check_dim(self.pair.dim(), v_plan.dim())?;
        let values: Vec<SaddleValue> = v_plan.points_vec().par_iter().map(|v| self.evaluate(v)).collect();
        let (mut max_gap, mut at, mut max_abs) = (f64::NEG_INFINITY, Vec::new(), 0.0f64);
        for s in &values {
            if s.gap > max_gap {
                max_gap = s.gap;
                at = s.v.clone();
            }
            max_abs = max_abs.max(s.gap.abs());
        }
        Ok(SaddleSweep { values, max_gap, max_gap_at: at, max_abs_gap: max_abs })
    }
}

/// Single-v̄ saddle probe.
pub fn saddle_gap(f: &ScalarFunction, pair: &LegendrePair, v: &[f64], primal: &SamplingPlan, dual: &SamplingPlan) -> Result<SaddleValue> {
    check_dim(pair.dim(), v.len())?;
    Ok(SaddleProbe::new(f, pair, primal, dual)?.evaluate(v))
}

/// Numerical `f*(v)` on ℝ by grid seeding on `[lo, hi]` plus golden refinement.
pub fn pointwise_conjugate_1d(f: &ScalarFunction, v: f64, lo: f64, hi: f64, scan: usize) -> (f64, f64) {
    let obj = |x: f64| -(x * v - f.evaluate(&[x]));
    let xs = crate::sampling::axis(lo, hi, scan.max(2));
    let (k, _) = xs
        .iter()
        .enumerate()
        .map(|(k, x)| (k, obj(*x)))
        .fold((0, f64::INFINITY), |b, (k, o)| if o < b.1 { (k, o) } else { b });
    let a = xs[k.saturating_sub(1)];
    let b = xs[(k + 1).min(xs.len() - 1)];
    let (x, o) = crate::search::golden_min(obj, a, b, 300);
    let o = o.min(obj(xs[k]));
    (-o, x)
}
