//! Extended-real function handles and Legendre reference pairs.

mod legendre;
mod piecewise;

use std::fmt;
use std::sync::Arc;

pub use legendre::{catalog_names, make_pair, LegendrePair, PairSpec};
pub use piecewise::{MaxOfShifts, PiecewiseLinear};

use crate::error::{check_dim, Error, Result};
use crate::expr::{Expr, TIE_TOLERANCE};

type ValueFn = dyn Fn(&[f64]) -> f64 + Send + Sync;
type GradFn = dyn Fn(&[f64]) -> Vec<Vec<f64>> + Send + Sync;
type DomainFn = dyn Fn(&[f64]) -> bool + Send + Sync;

/// An extended-real-valued function `ℝⁿ → ℝ ∪ {+∞}`.
///
/// `gradient` returns the vertices of the subdifferential: a single vector
/// at smooth points, the active-piece gradients at cusps, and nothing
/// outside the domain or on an indicator boundary.
#[derive(Clone)]
pub struct ScalarFunction {
    arity: usize,
    label: String,
    value: Arc<ValueFn>,
    gradient: Arc<GradFn>,
    domain: Option<Arc<DomainFn>>,
    expr: Option<Arc<Expr>>,
}

impl fmt::Debug for ScalarFunction {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("ScalarFunction").field("arity", &self.arity).field("label", &self.label).finish()
    }
}

impl ScalarFunction {
    /// Full-domain function from a value closure and a gradient-vertex closure.
    pub fn new(
        arity: usize,
        label: impl Into<String>,
        value: impl Fn(&[f64]) -> f64 + Send + Sync + 'static,
        gradient: impl Fn(&[f64]) -> Vec<Vec<f64>> + Send + Sync + 'static,
    ) -> Self {
        ScalarFunction {
            arity,
            label: label.into(),
            value: Arc::new(value),
            gradient: Arc::new(gradient),
            domain: None,
            expr: None,
        }
    }

    /// Smooth function given by value and single-valued gradient.
    pub fn smooth(
        arity: usize,
        label: impl Into<String>,
        value: impl Fn(&[f64]) -> f64 + Send + Sync + 'static,
        gradient: impl Fn(&[f64]) -> Vec<f64> + Send + Sync + 'static,
    ) -> Self {
        Self::new(arity, label, value, move |x| vec![gradient(x)])
    }

    /// Restricts the effective domain; `evaluate` is `+∞` outside it.
    pub fn with_domain(mut self, domain: impl Fn(&[f64]) -> bool + Send + Sync + 'static) -> Self {
        self.domain = Some(Arc::new(domain));
        self
    }

    pub fn with_label(mut self, label: impl Into<String>) -> Self {
        self.label = label.into();
        self
    }

    /// Function backed by an expression; points where evaluation fails lie outside the domain.
    pub fn from_expr(e: Expr) -> Self {
        Self::from_expr_with_arity(e.arity().max(1), e)
    }

    pub fn from_expr_with_arity(arity: usize, e: Expr) -> Self {
        let e = Arc::new(e);
        let (ev, eg, ed) = (e.clone(), e.clone(), e.clone());
        ScalarFunction {
            arity,
            label: e.to_string(),
            value: Arc::new(move |x| ev.eval(x).unwrap_or(f64::INFINITY)),
            gradient: Arc::new(move |x| eg.active_gradients(x).unwrap_or_default()),
            domain: Some(Arc::new(move |x| ed.eval(x).is_ok())),
            expr: Some(e),
        }
    }

    /// Parses `source` and wraps it with [`ScalarFunction::from_expr`].
    pub fn parse(source: &str) -> Result<Self> {
        Ok(Self::from_expr(Expr::parse_str(source)?))
    }

    pub fn arity(&self) -> usize {
        self.arity
    }

    pub fn label(&self) -> &str {
        &self.label
    }

    pub fn expr(&self) -> Option<&Expr> {
        self.expr.as_deref()
    }

    pub fn in_domain(&self, x: &[f64]) -> bool {
        x.len() == self.arity && self.domain.as_ref().is_none_or(|d| d(x))
    }

    /// Value at `x`; `+∞` outside the domain. NaN results are mapped to `+∞`.
    pub fn evaluate(&self, x: &[f64]) -> f64 {
        if !self.in_domain(x) {
            return f64::INFINITY;
        }
        let v = (self.value)(x);
        if v.is_nan() {
            f64::INFINITY
        } else {
            v
        }
    }

    /// Subdifferential vertices at `x` (empty outside the domain).
    pub fn gradient(&self, x: &[f64]) -> Vec<Vec<f64>> {
        if !self.in_domain(x) {
            return Vec::new();
        }
        (self.gradient)(x)
    }

    /// The gradient if `x` is a smooth point.
    pub fn smooth_gradient(&self, x: &[f64]) -> Option<Vec<f64>> {
        let mut g = self.gradient(x);
        if g.len() == 1 {
            g.pop()
        } else {
            None
        }
    }

    /// `x ↦ f(x − shift) + ⟨tilt, x⟩ + offset`.
    pub fn shift_tilt(&self, shift: &[f64], tilt: &[f64], offset: f64) -> Result<Self> {
        check_dim(self.arity, shift.len())?;
        check_dim(self.arity, tilt.len())?;
        let (f, g, d) = (self.clone(), self.clone(), self.clone());
        let (s1, s2, s3) = (shift.to_vec(), shift.to_vec(), shift.to_vec());
        let (t1, t2) = (tilt.to_vec(), tilt.to_vec());
        let sub = |x: &[f64], s: &[f64]| x.iter().zip(s).map(|(a, b)| a - b).collect::<Vec<_>>();
        Ok(ScalarFunction::new(
            self.arity,
            format!("shift_tilt({})", self.label),
            move |x| f.evaluate(&sub(x, &s1)) + crate::dot(&t1, x) + offset,
            move |x| {
                g.gradient(&sub(x, &s2))
                    .into_iter()
                    .map(|v| v.iter().zip(&t2).map(|(a, b)| a + b).collect())
                    .collect()
            },
        )
        .with_domain(move |x| d.in_domain(&sub(x, &s3))))
    }

    /// `a·f` for `a > 0`, or `a·f` for any real `a` when `f` is finite everywhere.
    pub fn scaled(&self, a: f64) -> Self {
        let (f, g, d) = (self.clone(), self.clone(), self.clone());
        ScalarFunction::new(
            self.arity,
            format!("{a}*{}", self.label),
            move |x| a * f.evaluate(x),
            move |x| g.gradient(x).into_iter().map(|v| v.into_iter().map(|c| a * c).collect()).collect(),
        )
        .with_domain(move |x| d.in_domain(x))
    }

    /// Pointwise sum.
    pub fn add(&self, other: &ScalarFunction) -> Result<Self> {
        check_dim(self.arity, other.arity)?;
        let (f1, f2) = (self.clone(), other.clone());
        let (g1, g2) = (self.clone(), other.clone());
        let (d1, d2) = (self.clone(), other.clone());
        Ok(ScalarFunction::new(
            self.arity,
            format!("{} + {}", self.label, other.label),
            move |x| f1.evaluate(x) + f2.evaluate(x),
            move |x| {
                let mut out = Vec::new();
                for a in g1.gradient(x) {
                    for b in g2.gradient(x) {
                        out.push(a.iter().zip(&b).map(|(p, q)| p + q).collect());
                    }
                }
                out
            },
        )
        .with_domain(move |x| d1.in_domain(x) && d2.in_domain(x)))
    }

    /// Pointwise maximum; the gradient set is the union over active pieces.
    pub fn max_of(pieces: Vec<ScalarFunction>) -> Result<Self> {
        let first = pieces.first().ok_or_else(|| Error::InvalidParameter("max of no pieces".into()))?;
        let arity = first.arity;
        for p in &pieces {
            check_dim(arity, p.arity)?;
        }
        let label = format!("max({})", pieces.iter().map(|p| p.label.clone()).collect::<Vec<_>>().join(", "));
        let pv = Arc::new(pieces);
        let pg = pv.clone();
        let pd = pv.clone();
        Ok(ScalarFunction::new(
            arity,
            label,
            move |x| pv.iter().map(|p| p.evaluate(x)).fold(f64::NEG_INFINITY, f64::max),
            move |x| {
                let vals: Vec<f64> = pg.iter().map(|p| p.evaluate(x)).collect();
                let best = vals.iter().copied().fold(f64::NEG_INFINITY, f64::max);
                let mut out: Vec<Vec<f64>> = Vec::new();
                for (p, v) in pg.iter().zip(&vals) {
                    if (v - best).abs() <= TIE_TOLERANCE {
                        for g in p.gradient(x) {
                            if !out.iter().any(|h| h.iter().zip(&g).all(|(a, b)| (a - b).abs() <= TIE_TOLERANCE)) {
                                out.push(g);
                            }
                        }
                    }
                }
                out
            },
        )
        .with_domain(move |x| pd.iter().all(|p| p.in_domain(x))))
    }
}

/// Indicator of the box `∏ [lower_i, upper_i]`.
pub fn indicator(lower: &[f64], upper: &[f64]) -> Result<ScalarFunction> {
    check_dim(lower.len(), upper.len())?;
    if lower.is_empty() || lower.iter().zip(upper).any(|(a, b)| !(a <= b)) {
        return Err(Error::InvalidParameter("empty box".into()));
    }
    let (lo, hi) = (lower.to_vec(), upper.to_vec());
    let (lo2, hi2) = (lo.clone(), hi.clone());
    let n = lo.len();
    let label = format!(
        "indicator[{}]",
        lo.iter().zip(&hi).map(|(a, b)| format!("{a},{b}")).collect::<Vec<_>>().join(";")
    );
    Ok(ScalarFunction::new(
        n,
        label,
        |_| 0.0,
        move |x| {
            let interior = x.iter().zip(lo2.iter().zip(&hi2)).all(|(v, (a, b))| a < v && v < b);
            if interior {
                vec![vec![0.0; x.len()]]
            } else {
                Vec::new()
            }
        },
    )
    .with_domain(move |x| x.iter().zip(lo.iter().zip(&hi)).all(|(v, (a, b))| a <= v && v <= b)))
}

/// The sign `r ∈ {−1, +1}` selecting weak (−1) or strong (+1) variants.
#[derive(Debug, Clone, Copy, PartialEq, Eq, serde::Serialize, serde::Deserialize)]
#[serde(try_from = "i64", into = "i64")]
pub enum Sign {
    Minus,
    Plus,
}

impl Sign {
    pub fn value(self) -> f64 {
        match self {
            Sign::Minus => -1.0,
            Sign::Plus => 1.0,
        }
    }
}

impl TryFrom<i64> for Sign {
    type Error = String;

    fn try_from(v: i64) -> std::result::Result<Self, String> {
        match v {
            1 => Ok(Sign::Plus),
            -1 => Ok(Sign::Minus),
            _ => Err(format!("r must be 1 or -1, got {v}")),
        }
    }
}

impl From<Sign> for i64 {
    fn from(s: Sign) -> i64 {
        s.value() as i64
    }
}

/// How interior subgradients are generated from subdifferential vertices.
#[derive(Debug, Clone, PartialEq, Default, serde::Serialize, serde::Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum SubgradientPolicy {
    /// The vertices only.
    Vertices,
    /// The vertices plus their centroid.
    #[default]
    VerticesAndMidpoint,
    /// `count` evenly spaced convex combinations along every vertex pair, plus the centroid.
    HullGrid { count: usize },
    /// Explicit convex weights; a weight vector applies where its length equals the vertex count.
    Weights { weights: Vec<Vec<f64>> },
}

impl SubgradientPolicy {
    /// Expands vertex gradients into the list of subgradients to test.
    pub fn expand(&self, vertices: &[Vec<f64>]) -> Vec<Vec<f64>> {
        let k = vertices.len();
        if k <= 1 {
            return vertices.to_vec();
        }
        let n = vertices[0].len();
        let combo = |w: &[f64]| {
            let mut g = vec![0.0; n];
            for (v, wi) in vertices.iter().zip(w) {
                for (gj, vj) in g.iter_mut().zip(v) {
                    *gj += wi * vj;
                }
            }
            g
        };
        let centroid = combo(&vec![1.0 / k as f64; k]);
        let mut out: Vec<Vec<f64>> = Vec::new();
        let push = |out: &mut Vec<Vec<f64>>, g: Vec<f64>| {
            if !out.iter().any(|h| h == &g) {
                out.push(g);
            }
        };
        match self {
            SubgradientPolicy::Vertices => return vertices.to_vec(),
            SubgradientPolicy::VerticesAndMidpoint => {
                out.extend(vertices.iter().cloned());
                push(&mut out, centroid);
            }
            SubgradientPolicy::HullGrid { count } => {
                let m = (*count).max(2);
                for i in 0..k {
                    for j in i + 1..k {
                        for s in 0..m {
                            let t = s as f64 / (m - 1) as f64;
                            let g = vertices[i].iter().zip(&vertices[j]).map(|(a, b)| (1.0 - t) * a + t * b).collect();
                            push(&mut out, g);
                        }
                    }
                }
                push(&mut out, centroid);
            }
            SubgradientPolicy::Weights { weights } => {
                out.extend(vertices.iter().cloned());
                for w in weights.iter().filter(|w| w.len() == k) {
                    push(&mut out, combo(w));
                }
            }
        }
        out
    }
}
