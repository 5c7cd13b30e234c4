//! Bregman distances, sampled B-convexity and B-smoothness certificates,
//! Bregman–Moreau and Bregman–Klee envelopes, and the six envelope identities.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{check_dim, Error, Result};
use crate::funcs::{LegendrePair, ScalarFunction, SubgradientPolicy};
use crate::io::{coord_names, Csv};
use crate::report::{CheckReport, MarginTracker, Verdict, Witness, DEFAULT_TOLERANCE};
use crate::sampling::SamplingPlan;
use crate::search::refine_min;

/// Envelope magnitudes beyond this are treated as unbounded.
pub const PROX_BOUND: f64 = 1e15;

/// `D(x, y) = φ(x) − φ(y) − ⟨∇φ(y), x − y⟩`.
pub fn bregman_distance(pair: &LegendrePair, x: &[f64], y: &[f64]) -> Result<f64> {
    check_dim(pair.dim(), x.len())?;
    check_dim(pair.dim(), y.len())?;
    Ok(pair.bregman(x, y))
}

/// Shared options of the sampled checkers.
#[derive(Debug, Clone, PartialEq)]
pub struct CheckOptions {
    pub tolerance: f64,
    pub policy: SubgradientPolicy,
    /// Multiplier `L` applied to `φ`.
    pub scale: f64,
}

impl Default for CheckOptions {
    fn default() -> Self {
        CheckOptions { tolerance: DEFAULT_TOLERANCE, policy: SubgradientPolicy::default(), scale: 1.0 }
    }
}

struct Sample {
    x: Vec<f64>,
    f: f64,
    phi: f64,
    grad_phi: Vec<f64>,
    subgradients: Vec<Vec<f64>>,
}

fn precompute(f: &ScalarFunction, pair: &LegendrePair, plan: &SamplingPlan, policy: &SubgradientPolicy) -> Vec<Sample> {
    plan.points_vec()
        .into_par_iter()
        .map(|x| {
            let subgradients = policy.expand(&f.gradient(&x));
            Sample { f: f.evaluate(&x), phi: pair.phi(&x), grad_phi: pair.grad_phi(&x), subgradients, x }
        })
        .collect()
}

#[inline]
fn breg(x: &Sample, y: &Sample) -> f64 {
    let mut ip = 0.0;
    for ((a, b), g) in x.x.iter().zip(&y.x).zip(&y.grad_phi) {
        ip += g * (a - b);
    }
    (x.phi - y.phi - ip).max(0.0)
}

fn validate(f: &ScalarFunction, pair: &LegendrePair, plan: &SamplingPlan) -> Result<()> {
    if plan.is_empty() {
        return Err(Error::EmptyPlan);
    }
    check_dim(pair.dim(), f.arity())?;
    check_dim(pair.dim(), plan.dim())
}

/// Tests B-weak (`r = −1`) or B-strong (`r = +1`) convexity of `f` relative
/// to `scale·φ` on every pair of plan points.
///
/// Both the anchored subgradient inequality
/// `f(x) ≥ f(x̄) + ⟨v̄, x − x̄⟩ + r·D(x, x̄)` and the monotonicity inequality
/// `⟨x − x′, v − v′⟩ ≥ r⟨x − x′, ∇φ(x) − ∇φ(x′)⟩` are tested.
pub fn check_b_convexity(
    f: &ScalarFunction,
    pair: &LegendrePair,
    r: f64,
    plan: &SamplingPlan,
    options: &CheckOptions,
) -> Result<CheckReport> {
    validate(f, pair, plan)?;
    if r != 1.0 && r != -1.0 {
        return Err(Error::InvalidParameter(format!("r must be +1 or -1, got {r}")));
    }
    let rs = r * options.scale;
    let samples = precompute(f, pair, plan, &options.policy);
    let trackers: Vec<MarginTracker> = samples
        .par_iter()
        .map(|a| {
            let mut t = MarginTracker::new();
            if a.subgradients.is_empty() || !a.f.is_finite() {
                t.skip();
                return t;
            }
            for b in &samples {
                if !b.f.is_finite() {
                    continue;
                }
                let d = breg(b, a);
                for v in &a.subgradients {
                    let lin: f64 = v.iter().zip(b.x.iter().zip(&a.x)).map(|(g, (p, q))| g * (p - q)).sum();
                    let m = b.f - a.f - lin - rs * d;
                    t.record(m, || Witness {
                        point: b.x.clone(),
                        anchor: Some(a.x.clone()),
                        subgradient: Some(v.clone()),
                        dual: None,
                    });
                    for w in &b.subgradients {
                        let mut m = 0.0;
                        for j in 0..a.x.len() {
                            let dx = a.x[j] - b.x[j];
                            m += dx * (v[j] - w[j]) - rs * dx * (a.grad_phi[j] - b.grad_phi[j]);
                        }
                        t.record(m, || Witness {
                            point: b.x.clone(),
                            anchor: Some(a.x.clone()),
                            subgradient: Some(v.clone()),
                            dual: Some(w.clone()),
                        });
                    }
                }
            }
            t
        })
        .collect();
    let mut rep = MarginTracker::merge_all(trackers).report(options.tolerance);
    if rep.skipped > 0 {
        rep.notes.push(format!("{} samples without subgradients skipped", rep.skipped));
    }
    Ok(rep)
}

/// Tests `|f(x) − f(x̄) − ⟨∇f(x̄), x − x̄⟩| ≤ scale·D(x, x̄)` on every pair of
/// plan points. Anchors with a multivalued gradient make the verdict
/// inconclusive unless a violation is found.
pub fn check_b_smooth(f: &ScalarFunction, pair: &LegendrePair, plan: &SamplingPlan, options: &CheckOptions) -> Result<CheckReport> {
    validate(f, pair, plan)?;
    let samples = precompute(f, pair, plan, &SubgradientPolicy::Vertices);
    let s = options.scale;
    let trackers: Vec<MarginTracker> = samples
        .par_iter()
        .map(|a| {
            let mut t = MarginTracker::new();
            if a.subgradients.len() != 1 || !a.f.is_finite() {
                t.skip();
                return t;
            }
            let g = &a.subgradients[0];
            for b in &samples {
                let lin: f64 = g.iter().zip(b.x.iter().zip(&a.x)).map(|(g, (p, q))| g * (p - q)).sum();
                let m = s * breg(b, a) - (b.f - a.f - lin).abs();
                t.record(m, || Witness { point: b.x.clone(), anchor: Some(a.x.clone()), subgradient: Some(g.clone()), dual: None });
            }
            t
        })
        .collect();
    let rep = MarginTracker::merge_all(trackers).report(options.tolerance);
    Ok(if rep.skipped > 0 {
        let note = format!("{} anchors are not smooth points", rep.skipped);
        rep.inconclusive_unless_violated(note)
    } else {
        rep
    })
}

/// Per-scale B-smoothness verdicts.
pub fn check_b_smooth_ladder(
    f: &ScalarFunction,
    pair: &LegendrePair,
    plan: &SamplingPlan,
    scales: &[f64],
    tolerance: f64,
) -> Result<Vec<(f64, CheckReport)>> {
    scales
        .iter()
        .map(|&scale| {
            let opts = CheckOptions { tolerance, scale, ..CheckOptions::default() };
            Ok((scale, check_b_smooth(f, pair, plan, &opts)?))
        })
        .collect()
}

/// Which argument of `D` carries the envelope variable.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "snake_case")]
pub enum Side {
    /// `D(z, y)`: the envelope variable is in the second slot.
    #[default]
    Left,
    /// `D(y, z)`: the envelope variable is in the first slot.
    Right,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum EnvelopeKind {
    /// `inf_z g(z) + D`.
    Moreau,
    /// `sup_z D − g(z)`.
    Klee,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct EnvelopeValue {
    pub value: f64,
    pub argument: f64,
}

/// Grid-seeded envelope evaluator.
#[derive(Clone)]
pub struct Envelope {
    g: ScalarFunction,
    pair: LegendrePair,
    kind: EnvelopeKind,
    side: Side,
    points: Vec<Vec<f64>>,
    g_values: Vec<f64>,
    phi_values: Vec<f64>,
    grad_phi: Vec<Vec<f64>>,
    step: Vec<f64>,
    lower: Vec<f64>,
    upper: Vec<f64>,
}

/// Minimizer and value of an envelope's inner problem.
#[derive(Debug, Clone, PartialEq)]
pub struct EnvelopePoint {
    pub value: f64,
    pub argument: Vec<f64>,
}

impl Envelope {
    pub fn new(g: &ScalarFunction, pair: &LegendrePair, kind: EnvelopeKind, side: Side, plan: &SamplingPlan) -> Result<Self> {
        check_dim(pair.dim(), g.arity())?;
        check_dim(pair.dim(), plan.dim())?;
        if plan.is_empty() {
            return Err(Error::EmptyPlan);
        }
        let points = plan.points_vec();
        let g_values: Vec<f64> = points.par_iter().map(|z| g.evaluate(z)).collect();
        if !g_values.iter().any(|v| v.is_finite()) {
            return Err(Error::Improper);
        }
        let phi_values = points.iter().map(|z| pair.phi(z)).collect();
        let grad_phi = points.iter().map(|z| pair.grad_phi(z)).collect();
        let (lower, upper) = plan.bounds();
        let step = plan.spacing().unwrap_or_else(|| vec![0.0; pair.dim()]);
        Ok(Envelope { g: g.clone(), pair: pair.clone(), kind, side, points, g_values, phi_values, grad_phi, step, lower, upper })
    }

    /// Objective minimized over `z`; Klee envelopes minimize the negation.
    fn objective(&self, z: &[f64], y: &[f64]) -> f64 {
        let gz = self.g.evaluate(z);
        if !gz.is_finite() {
            return f64::INFINITY;
        }
        let d = match self.side {
            Side::Left => self.pair.bregman(z, y),
            Side::Right => self.pair.bregman(y, z),
        };
        match self.kind {
            EnvelopeKind::Moreau => gz + d,
            EnvelopeKind::Klee => gz - d,
        }
    }

    fn seeded(&self, k: usize, y: &[f64], phi_y: f64, grad_y: &[f64]) -> f64 {
        let gz = self.g_values[k];
        if !gz.is_finite() {
            return f64::INFINITY;
        }
        let z = &self.points[k];
        let d = match self.side {
            Side::Left => {
                let ip: f64 = grad_y.iter().zip(z.iter().zip(y)).map(|(g, (a, b))| g * (a - b)).sum();
                self.phi_values[k] - phi_y - ip
            }
            Side::Right => {
                let ip: f64 = self.grad_phi[k].iter().zip(y.iter().zip(z)).map(|(g, (a, b))| g * (a - b)).sum();
                phi_y - self.phi_values[k] - ip
            }
        }
        .max(0.0);
        match self.kind {
            EnvelopeKind::Moreau => gz + d,
            EnvelopeKind::Klee => gz - d,
        }
    }

    /// Grid-only value at `y`.
    pub fn grid_value(&self, y: &[f64]) -> f64 {
        let (phi_y, grad_y) = (self.pair.phi(y), self.pair.grad_phi(y));
        let best = (0..self.points.len()).map(|k| self.seeded(k, y, phi_y, &grad_y)).fold(f64::INFINITY, f64::min);
        match self.kind {
            EnvelopeKind::Moreau => best,
            EnvelopeKind::Klee => -best,
        }
    }

    pub fn evaluate(&self, y: &[f64]) -> Result<EnvelopePoint> {
        check_dim(self.pair.dim(), y.len())?;
        let (phi_y, grad_y) = (self.pair.phi(y), self.pair.grad_phi(y));
        let mut best = (f64::INFINITY, 0);
        for k in 0..self.points.len() {
            let v = self.seeded(k, y, phi_y, &grad_y);
            if v < best.0 {
                best = (v, k);
            }
        }
        let z0 = &self.points[best.1];
        let f0 = self.objective(z0, y);
        let obj = |z: &[f64]| self.objective(z, y);
        let (z, v) = refine_min(&obj, z0, f0, &self.step, &self.lower, &self.upper);
        let value = match self.kind {
            EnvelopeKind::Moreau => v,
            EnvelopeKind::Klee => -v,
        };
        if !value.is_finite() || value.abs() > PROX_BOUND {
            return Err(Error::NotProxBounded);
        }
        Ok(EnvelopePoint { value, argument: z })
    }

    /// CSV with columns `(y, value, argument)` over `plan`.
    pub fn trace(&self, plan: &SamplingPlan) -> Result<Csv> {
        let n = self.pair.dim();
        let mut header = coord_names("y", n);
        header.push("value".into());
        header.extend(coord_names("arg", n));
        let rows: Vec<Result<Vec<f64>>> = plan
            .points_vec()
            .par_iter()
            .map(|y| {
                let e = self.evaluate(y)?;
                let mut row = y.clone();
                row.push(e.value);
                row.extend(e.argument);
                Ok(row)
            })
            .collect();
        let mut csv = Csv::new(header);
        for row in rows {
            csv.push(row?);
        }
        Ok(csv)
    }
}

/// Bregman–Moreau envelope of `g` at `y`: `inf_z g(z) + D(z, y)` (left) or
/// `inf_z g(z) + D(y, z)` (right) over the plan, refined locally.
pub fn moreau_envelope(g: &ScalarFunction, pair: &LegendrePair, side: Side, y: &[f64], plan: &SamplingPlan) -> Result<EnvelopePoint> {
    Envelope::new(g, pair, EnvelopeKind::Moreau, side, plan)?.evaluate(y)
}

/// Bregman–Klee envelope of `g` at `y`: `sup_z D(z, y) − g(z)` (left) or
/// `sup_z D(y, z) − g(z)` (right).
pub fn klee_envelope(g: &ScalarFunction, pair: &LegendrePair, side: Side, y: &[f64], plan: &SamplingPlan) -> Result<EnvelopePoint> {
    Envelope::new(g, pair, EnvelopeKind::Klee, side, plan)?.evaluate(y)
}

/// The six conjugate-duality identities between envelopes.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, PartialOrd, Ord)]
#[serde(rename_all = "snake_case")]
pub enum Identity {
    /// `env* g = φ − (g∘∇φ* + φ*)*`.
    RightMoreauConjugate,
    /// `env g ∘ ∇φ* = φ* − (g + φ)*`.
    LeftMoreauConjugate,
    /// `−env*(−env g) = (g + φ)** − φ`.
    MoreauBiconjugate,
    /// `klee* g = φ + (g∘∇φ* − φ*)*(−·)`.
    RightKleeConjugate,
    /// `klee g ∘ ∇φ* = φ* + (g − φ)*(−·)`.
    LeftKleeConjugate,
    /// `klee*(klee g) = φ + (g − φ)**`.
    KleeBiconjugate,
}

impl Identity {
    pub const ALL: [Identity; 6] = [
        Identity::RightMoreauConjugate,
        Identity::LeftMoreauConjugate,
        Identity::MoreauBiconjugate,
        Identity::RightKleeConjugate,
        Identity::LeftKleeConjugate,
        Identity::KleeBiconjugate,
    ];
    pub const MOREAU: [Identity; 3] = [Identity::RightMoreauConjugate, Identity::LeftMoreauConjugate, Identity::MoreauBiconjugate];
    pub const KLEE: [Identity; 3] = [Identity::RightKleeConjugate, Identity::LeftKleeConjugate, Identity::KleeBiconjugate];

    pub fn name(self) -> &'static str {
        match self {
            Identity::RightMoreauConjugate => "right_moreau_conjugate",
            Identity::LeftMoreauConjugate => "left_moreau_conjugate",
            Identity::MoreauBiconjugate => "moreau_biconjugate",
            Identity::RightKleeConjugate => "right_klee_conjugate",
            Identity::LeftKleeConjugate => "left_klee_conjugate",
            Identity::KleeBiconjugate => "klee_biconjugate",
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct IdentityOptions {
    pub identities: Vec<Identity>,
    /// Maximum allowed discrepancy on the base grid.
    pub tolerance: f64,
    /// Evaluation points cover this central fraction of the box.
    pub eval_fraction: f64,
    /// Evaluation points per axis.
    pub eval_count: usize,
    /// Discrepancies below this count as exact and skip the refinement test.
    pub exact_floor: f64,
}

impl Default for IdentityOptions {
    fn default() -> Self {
        IdentityOptions { identities: Identity::ALL.to_vec(), tolerance: 1e-3, eval_fraction: 0.5, eval_count: 41, exact_floor: 1e-9 }
    }
}

/// One identity on the base grid and on its refinement.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct IdentityCheck {
    pub identity: Identity,
    pub coarse: f64,
    pub fine: f64,
    pub report: CheckReport,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct IdentityReport {
    pub identities: Vec<IdentityCheck>,
    pub summary: CheckReport,
}

/// Grid over the per-coordinate range of `∇φ` on `plan`, with the same counts.
pub fn gradient_range_plan(pair: &LegendrePair, plan: &SamplingPlan) -> Result<SamplingPlan> {
    let SamplingPlan::Grid { counts, .. } = plan else {
        return Err(Error::Config("identity checks need a grid plan".into()));
    };
    let n = pair.dim();
    let (mut lo, mut hi) = (vec![f64::INFINITY; n], vec![f64::NEG_INFINITY; n]);
    for x in plan.points_vec() {
        for (j, g) in pair.grad_phi(&x).into_iter().enumerate() {
            lo[j] = lo[j].min(g);
            hi[j] = hi[j].max(g);
        }
    }
    SamplingPlan::grid(lo, hi, counts.clone())
}

fn eval_plan(plan: &SamplingPlan, fraction: f64, count: usize) -> Result<SamplingPlan> {
    let (lo, hi) = plan.bounds();
    let (mut a, mut b) = (Vec::new(), Vec::new());
    for (l, h) in lo.iter().zip(&hi) {
        let (c, r) = (0.5 * (l + h), 0.5 * fraction * (h - l));
        a.push(c - r);
        b.push(c + r);
    }
    SamplingPlan::grid(a, b, vec![count; plan.dim()])
}

/// Refined supremum of `obj` seeded by its values on `pts`.
fn sup_seeded(obj: &(dyn Fn(&[f64]) -> f64 + Sync), pts: &[Vec<f64>], seeds: &[f64], plan: &SamplingPlan) -> f64 {
    let mut best = (f64::NEG_INFINITY, 0);
    for (k, v) in seeds.iter().enumerate() {
        if *v > best.0 {
            best = (*v, k);
        }
    }
    if !best.0.is_finite() {
        return best.0;
    }
    let (lo, hi) = plan.bounds();
    let step = plan.spacing().unwrap_or_else(|| vec![0.0; lo.len()]);
    let neg = |z: &[f64]| -obj(z);
    let (_, v) = refine_min(&neg, &pts[best.1], -best.0, &step, &lo, &hi);
    -v
}

fn sup_over(obj: &(dyn Fn(&[f64]) -> f64 + Sync), pts: &[Vec<f64>], plan: &SamplingPlan) -> f64 {
    let seeds: Vec<f64> = pts.iter().map(|z| obj(z)).collect();
    sup_seeded(obj, pts, &seeds, plan)
}

/// Absolute discrepancies of one identity at every evaluation point.
fn identity_discrepancy(
    id: Identity,
    g: &ScalarFunction,
    pair: &LegendrePair,
    plan: &SamplingPlan,
    evals: &[Vec<f64>],
) -> Result<(f64, Vec<f64>)> {
    let dual = gradient_range_plan(pair, plan)?;
    let xs = plan.points_vec();
    let vs = dual.points_vec();
    let neg = |x: &[f64]| x.iter().map(|t| -t).collect::<Vec<f64>>();
    // (g ± φ)* on arbitrary v, refined over the primal plan.
    let conj_x = |sign: f64| {
        let xs = &xs;
        move |v: &[f64]| {
            let obj = |x: &[f64]| crate::dot(x, v) - g.evaluate(x) - sign * pair.phi(x);
            sup_over(&obj, xs, plan)
        }
    };
    let values: Vec<Result<(f64, f64)>> = match id {
        Identity::RightMoreauConjugate | Identity::RightKleeConjugate => {
            let (kind, s) = if id == Identity::RightMoreauConjugate { (EnvelopeKind::Moreau, 1.0) } else { (EnvelopeKind::Klee, -1.0) };
            let env = Envelope::new(g, pair, kind, Side::Right, plan)?;
            evals
                .par_iter()
                .map(|x| {
                    let lhs = env.evaluate(x)?.value;
                    let w = if s > 0.0 { x.clone() } else { neg(x) };
                    let obj = |v: &[f64]| crate::dot(&w, v) - g.evaluate(&pair.grad_phi_star(v)) - s * pair.phi_star(v);
                    let c = sup_over(&obj, &vs, &dual);
                    Ok((lhs, pair.phi(x) - s * c))
                })
                .collect()
        }
        Identity::LeftMoreauConjugate | Identity::LeftKleeConjugate => {
            let (kind, s) = if id == Identity::LeftMoreauConjugate { (EnvelopeKind::Moreau, 1.0) } else { (EnvelopeKind::Klee, -1.0) };
            let env = Envelope::new(g, pair, kind, Side::Left, plan)?;
            let conj = conj_x(s);
            evals
                .par_iter()
                .map(|x| {
                    let v = pair.grad_phi(x);
                    let lhs = env.evaluate(&pair.grad_phi_star(&v))?.value;
                    let c = if s > 0.0 { conj(&v) } else { conj(&neg(&v)) };
                    Ok((lhs, pair.phi_star(&v) - s * c))
                })
                .collect()
        }
        Identity::MoreauBiconjugate | Identity::KleeBiconjugate => {
            let (kind, s) = if id == Identity::MoreauBiconjugate { (EnvelopeKind::Moreau, 1.0) } else { (EnvelopeKind::Klee, -1.0) };
            let env = Envelope::new(g, pair, kind, Side::Left, plan)?;
            let env_at = |y: &[f64]| env.evaluate(y).map(|e| e.value).unwrap_or(f64::NAN);
            let env_table: Vec<f64> = xs.par_iter().map(|y| env_at(y)).collect();
            if env_table.iter().any(|v| v.is_nan()) {
                return Err(Error::NotProxBounded);
            }
            let conj = conj_x(s);
            let conj_table: Vec<f64> = vs.par_iter().map(|v| conj(v)).collect();
            evals
                .par_iter()
                .map(|x| {
                    // Moreau: sup_y env(y) − D(x, y); Klee: sup_y D(x, y) − klee(y).
                    let outer = |y: &[f64]| s * env_at(y) - s * pair.bregman(x, y);
                    let seeds: Vec<f64> = xs.iter().zip(&env_table).map(|(y, e)| s * e - s * pair.bregman(x, y)).collect();
                    let lhs = sup_seeded(&outer, &xs, &seeds, plan);
                    let bi = |v: &[f64]| crate::dot(x, v) - conj(v);
                    let bseeds: Vec<f64> = vs.iter().zip(&conj_table).map(|(v, c)| crate::dot(x, v) - c).collect();
                    let bic = sup_seeded(&bi, &vs, &bseeds, &dual);
                    let rhs = if s > 0.0 { bic - pair.phi(x) } else { pair.phi(x) + bic };
                    Ok((lhs, rhs))
                })
                .collect()
        }
    };
    let mut diffs = Vec::with_capacity(values.len());
    for v in values {
        let (l, r) = v?;
        diffs.push(if l.is_finite() && r.is_finite() { (l - r).abs() } else if l == r { 0.0 } else { f64::INFINITY });
    }
    let worst = diffs.iter().copied().fold(0.0, f64::max);
    Ok((worst, diffs))
}

/// Evaluates the selected identities at central sample points on `plan` and
/// on its refinement.
///
/// An identity holds when its base-grid discrepancy is within tolerance and
/// shrinks under refinement (or both are below the exactness floor); it is
/// violated when the discrepancy exceeds tolerance, and inconclusive when it
/// is within tolerance but does not shrink.
pub fn verify_moreau_klee_identities(
    g: &ScalarFunction,
    pair: &LegendrePair,
    plan: &SamplingPlan,
    options: &IdentityOptions,
) -> Result<IdentityReport> {
    check_dim(pair.dim(), g.arity())?;
    check_dim(pair.dim(), plan.dim())?;
    let evals = eval_plan(plan, options.eval_fraction, options.eval_count)?.points_vec();
    let fine_plan = plan.refined();
    let mut checks = Vec::new();
    let mut summary = MarginTracker::new();
    for &id in &options.identities {
        let (coarse, diffs) = identity_discrepancy(id, g, pair, plan, &evals)?;
        let (fine, _) = identity_discrepancy(id, g, pair, &fine_plan, &evals)?;
        let mut t = MarginTracker::new();
        for (x, d) in evals.iter().zip(&diffs) {
            t.record(-d, || Witness { point: x.clone(), ..Default::default() });
        }
        let mut report = t.report(options.tolerance);
        let exact = coarse <= options.exact_floor && fine <= options.exact_floor;
        if report.holds() && !exact && !(fine < coarse) {
            report.verdict = Verdict::Inconclusive;
            report.notes.push("discrepancy does not decrease under refinement".into());
        }
        summary.record(-coarse, || report.witness.clone().unwrap_or_default());
        checks.push(IdentityCheck { identity: id, coarse, fine, report });
    }
    let mut summary = summary.report(options.tolerance);
    if summary.holds() && checks.iter().any(|c| c.report.verdict == Verdict::Inconclusive) {
        summary.verdict = Verdict::Inconclusive;
    }
    summary.notes.extend(checks.iter().map(|c| format!("{}: {:?}", c.identity.name(), c.report.verdict)));
    Ok(IdentityReport { identities: checks, summary })
}
