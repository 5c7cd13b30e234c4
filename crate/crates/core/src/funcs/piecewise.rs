use std::sync::Arc;

use super::{LegendrePair, ScalarFunction};
use crate::error::{check_dim, Error, Result};
use crate::expr::TIE_TOLERANCE;

/// Convex piecewise-linear `g(x) = maxₖ (aₖ x + bₖ)` on ℝ, stored as the
/// nonredundant pieces ordered by slope.
#[derive(Debug, Clone, PartialEq)]
pub struct PiecewiseLinear {
    slopes: Vec<f64>,
    intercepts: Vec<f64>,
}

impl PiecewiseLinear {
    pub fn new(pieces: &[(f64, f64)]) -> Result<Self> {
        if pieces.is_empty() || pieces.iter().any(|(a, b)| !a.is_finite() || !b.is_finite()) {
            return Err(Error::InvalidParameter("piecewise-linear function needs finite pieces".into()));
        }
        let mut sorted = pieces.to_vec();
        sorted.sort_by(|p, q| p.0.total_cmp(&q.0).then(q.1.total_cmp(&p.1)));
        sorted.dedup_by(|q, p| q.0 == p.0);
        let mut hull: Vec<(f64, f64)> = Vec::new();
        for line in sorted {
            while hull.len() >= 2 {
                let (l1, l2) = (hull[hull.len() - 2], hull[hull.len() - 1]);
                // l2 is redundant when l1 and line cross at or below l2
                let x12 = (l1.1 - l2.1) / (l2.0 - l1.0);
                let x13 = (l1.1 - line.1) / (line.0 - l1.0);
                if x13 <= x12 {
                    hull.pop();
                } else {
                    break;
                }
            }
            hull.push(line);
        }
        Ok(PiecewiseLinear {
            slopes: hull.iter().map(|p| p.0).collect(),
            intercepts: hull.iter().map(|p| p.1).collect(),
        })
    }

    pub fn slopes(&self) -> &[f64] {
        &self.slopes
    }

    pub fn intercepts(&self) -> &[f64] {
        &self.intercepts
    }

    pub fn value(&self, x: f64) -> f64 {
        self.slopes.iter().zip(&self.intercepts).map(|(a, b)| a * x + b).fold(f64::NEG_INFINITY, f64::max)
    }

    /// Kink locations between consecutive pieces.
    pub fn breakpoints(&self) -> Vec<f64> {
        (0..self.slopes.len().saturating_sub(1))
            .map(|k| (self.intercepts[k] - self.intercepts[k + 1]) / (self.slopes[k + 1] - self.slopes[k]))
            .collect()
    }

    pub fn function(&self) -> ScalarFunction {
        let (a, b) = (self.clone(), self.clone());
        ScalarFunction::new(
            1,
            "piecewise_linear",
            move |x| a.value(x[0]),
            move |x| {
                let best = b.value(x[0]);
                b.slopes
                    .iter()
                    .zip(&b.intercepts)
                    .filter(|(s, c)| (*s * x[0] + *c - best).abs() <= TIE_TOLERANCE)
                    .map(|(s, _)| vec![*s])
                    .collect()
            },
        )
    }

    /// `g*(v)`: finite on `[a₁, a_K]`, affine between consecutive slopes.
    pub fn conjugate(&self, v: f64) -> f64 {
        let k = self.slopes.len();
        if v < self.slopes[0] || v > self.slopes[k - 1] {
            return f64::INFINITY;
        }
        if k == 1 {
            return -self.intercepts[0];
        }
        let xs = self.breakpoints();
        let j = (0..k - 1).find(|&j| v <= self.slopes[j + 1]).unwrap_or(k - 2);
        v * xs[j] - self.value(xs[j])
    }

    /// Closed form of the infimal convolution `g □ φ` for a univariate pair.
    ///
    /// Uses `(g □ φ)(x) = sup_v xv − g*(v) − φ*(v)`, maximized piece by piece
    /// over the affine segments of `g*`. The gradient is the maximizing `v`.
    pub fn inf_conv(&self, pair: &LegendrePair) -> Result<ScalarFunction> {
        check_dim(1, pair.dim())?;
        let s = Arc::new((self.clone(), pair.clone(), self.breakpoints()));
        let (s1, s2) = (s.clone(), s);
        Ok(ScalarFunction::smooth(
            1,
            format!("piecewise_linear # {}", pair.label()),
            move |x| inf_conv_eval(&s1.0, &s1.1, &s1.2, x[0]).0,
            move |x| vec![inf_conv_eval(&s2.0, &s2.1, &s2.2, x[0]).1],
        ))
    }
}

fn inf_conv_eval(g: &PiecewiseLinear, pair: &LegendrePair, xs: &[f64], x: f64) -> (f64, f64) {
    if g.slopes.len() == 1 {
        let a = g.slopes[0];
        return (a * x + g.intercepts[0] - pair.phi_star(&[a]), a);
    }
    let mut best = (f64::NEG_INFINITY, 0.0);
    for (k, xk) in xs.iter().enumerate() {
        let v = pair.grad_phi(&[x - xk])[0].clamp(g.slopes[k], g.slopes[k + 1]);
        let h = v * (x - xk) + g.value(*xk) - pair.phi_star(&[v]);
        if h > best.0 {
            best = (h, v);
        }
    }
    best
}

/// `f(x) = maxᵢ r·φ(x − yᵢ) − βᵢ` for a reference pair φ and `r = ±1`.
#[derive(Debug, Clone, PartialEq)]
pub struct MaxOfShifts {
    pub pair: LegendrePair,
    pub r: f64,
    pub shifts: Vec<Vec<f64>>,
    pub offsets: Vec<f64>,
}

impl MaxOfShifts {
    pub fn new(pair: LegendrePair, r: f64, shifts: Vec<Vec<f64>>, offsets: Vec<f64>) -> Result<Self> {
        if r != 1.0 && r != -1.0 {
            return Err(Error::InvalidParameter(format!("r must be +1 or -1, got {r}")));
        }
        if shifts.is_empty() || shifts.len() != offsets.len() {
            return Err(Error::InvalidParameter("need one offset per shift".into()));
        }
        for y in &shifts {
            check_dim(pair.dim(), y.len())?;
        }
        Ok(MaxOfShifts { pair, r, shifts, offsets })
    }

    pub fn piece(&self, i: usize, x: &[f64]) -> f64 {
        let z: Vec<f64> = x.iter().zip(&self.shifts[i]).map(|(a, b)| a - b).collect();
        self.r * self.pair.phi(&z) - self.offsets[i]
    }

    pub fn value(&self, x: &[f64]) -> f64 {
        (0..self.shifts.len()).map(|i| self.piece(i, x)).fold(f64::NEG_INFINITY, f64::max)
    }

    fn argmax(&self, x: &[f64]) -> usize {
        let mut best = (f64::NEG_INFINITY, 0);
        for i in 0..self.shifts.len() {
            let v = self.piece(i, x);
            if v > best.0 {
                best = (v, i);
            }
        }
        best.1
    }

    pub fn function(&self) -> ScalarFunction {
        let pieces = (0..self.shifts.len())
            .map(|i| {
                let (m1, m2) = (self.clone(), self.clone());
                ScalarFunction::smooth(
                    self.pair.dim(),
                    format!("piece{i}"),
                    move |x| m1.piece(i, x),
                    move |x| {
                        let z: Vec<f64> = x.iter().zip(&m2.shifts[i]).map(|(a, b)| a - b).collect();
                        m2.pair.grad_phi(&z).into_iter().map(|g| m2.r * g).collect()
                    },
                )
            })
            .collect();
        ScalarFunction::max_of(pieces)
            .expect("pieces share the pair dimension")
            .with_label(format!("max_of_shifts({}, r={})", self.pair.label(), self.r))
    }

    /// Points in `[lo, hi]` where two pieces tie at the maximum (univariate only).
    pub fn cusps(&self, lo: f64, hi: f64, scan: usize) -> Vec<f64> {
        if self.pair.dim() != 1 || scan < 2 {
            return Vec::new();
        }
        let mut out = Vec::new();
        let xs: Vec<f64> = (0..scan).map(|k| lo + (hi - lo) * k as f64 / (scan - 1) as f64).collect();
        for w in xs.windows(2) {
            self.locate(w[0], w[1], 0, &mut out);
        }
        out.dedup_by(|a, b| (*a - *b).abs() <= 1e-12);
        out
    }

    fn locate(&self, a: f64, b: f64, depth: usize, out: &mut Vec<f64>) {
        let (i, j) = (self.argmax(&[a]), self.argmax(&[b]));
        if i == j || depth > 8 {
            return;
        }
        let d = |x: f64| self.piece(i, &[x]) - self.piece(j, &[x]);
        let (mut lo, mut hi) = (a, b);
        loop {
            let mid = 0.5 * (lo + hi);
            if mid <= lo || mid >= hi {
                break;
            }
            if d(mid) >= 0.0 {
                lo = mid;
            } else {
                hi = mid;
            }
        }
        let x = if d(lo).abs() <= d(hi).abs() { lo } else { hi };
        let top = self.value(&[x]);
        if (self.piece(i, &[x]) - top).abs() <= TIE_TOLERANCE && (self.piece(j, &[x]) - top).abs() <= TIE_TOLERANCE {
            out.push(x);
        } else {
            self.locate(a, x, depth + 1, out);
            self.locate(x, b, depth + 1, out);
        }
    }
}
