use serde::{Deserialize, Serialize};

use super::ScalarFunction;
use crate::error::{check_dim, Error, Result};

/// Catalog key plus parameters, as written in scenario files and CLI flags.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PairSpec {
    pub name: String,
    #[serde(default)]
    pub params: Vec<f64>,
    #[serde(default)]
    pub dim: Option<usize>,
}

impl PairSpec {
    /// Parses `name[:p1[,p2...]]`, e.g. `quadratic:1` or `power_even:3,1`.
    pub fn parse(text: &str) -> Result<Self> {
        let (name, rest) = match text.split_once(':') {
            Some((n, r)) => (n, Some(r)),
            None => (text, None),
        };
        let params = match rest {
            Some(r) if !r.trim().is_empty() => r
                .split(',')
                .map(|s| {
                    s.trim()
                        .parse::<f64>()
                        .map_err(|_| Error::InvalidParameter(format!("cannot parse pair parameter '{s}'")))
                })
                .collect::<Result<Vec<_>>>()?,
            _ => Vec::new(),
        };
        Ok(PairSpec { name: name.trim().to_string(), params, dim: None })
    }

    pub fn build(&self, dim: Option<usize>) -> Result<LegendrePair> {
        make_pair(&self.name, &self.params, self.dim.or(dim))
    }
}

#[derive(Debug, Clone, PartialEq)]
enum Kind {
    Quadratic { lambda: f64 },
    PowerEven { p: f64, c: f64 },
    QuarticQuadratic { l: f64 },
    AnisoPoly,
    Scaled { factor: f64, inner: Box<LegendrePair> },
    EpiSum { parts: Vec<(f64, LegendrePair)> },
}

/// A Legendre reference function φ on ℝⁿ with ∇φ, φ* and ∇φ* in closed form.
///
/// Point arguments must have length [`LegendrePair::dim`].
#[derive(Debug, Clone, PartialEq)]
pub struct LegendrePair {
    kind: Kind,
    dim: usize,
    label: String,
}

pub fn catalog_names() -> &'static [&'static str] {
    &["quadratic", "power_even", "quartic_quadratic", "cubic_abs", "three_halves", "aniso_poly"]
}

fn positive(name: &str, v: f64) -> Result<f64> {
    if v.is_finite() && v > 0.0 {
        Ok(v)
    } else {
        Err(Error::InvalidParameter(format!("{name} must be positive and finite, got {v}")))
    }
}

fn param_count(name: &str, params: &[f64], max: usize) -> Result<()> {
    if params.len() > max {
        return Err(Error::InvalidParameter(format!("{name} takes at most {max} parameter(s), got {}", params.len())));
    }
    Ok(())
}

fn fixed_dim(name: &str, want: usize, dim: Option<usize>) -> Result<usize> {
    match dim {
        Some(d) if d != want => Err(Error::InvalidParameter(format!("{name} is {want}-dimensional, requested {d}"))),
        _ => Ok(want),
    }
}

/// Builds a catalog pair. `dim` defaults to 1 except for the 2-D entries.
pub fn make_pair(name: &str, params: &[f64], dim: Option<usize>) -> Result<LegendrePair> {
    if dim == Some(0) {
        return Err(Error::InvalidParameter("dimension must be at least 1".into()));
    }
    match name {
        "quadratic" => {
            param_count(name, params, 1)?;
            LegendrePair::quadratic(params.first().copied().unwrap_or(1.0), dim.unwrap_or(1))
        }
        "power_even" => {
            param_count(name, params, 2)?;
            let p = *params.first().ok_or_else(|| Error::InvalidParameter("power_even needs p".into()))?;
            LegendrePair::power_even(p, params.get(1).copied().unwrap_or(1.0), dim.unwrap_or(1))
        }
        "quartic_quadratic" => {
            param_count(name, params, 1)?;
            LegendrePair::quartic_quadratic(params.first().copied().unwrap_or(1.0), dim.unwrap_or(2))
        }
        "cubic_abs" => {
            param_count(name, params, 0)?;
            fixed_dim(name, 1, dim)?;
            Ok(LegendrePair::cubic_abs())
        }
        "three_halves" => {
            param_count(name, params, 0)?;
            fixed_dim(name, 1, dim)?;
            Ok(LegendrePair::three_halves())
        }
        "aniso_poly" => {
            param_count(name, params, 0)?;
            fixed_dim(name, 2, dim)?;
            Ok(LegendrePair::aniso_poly())
        }
        _ => Err(Error::UnknownPair(name.to_string())),
    }
}

fn sign(v: f64) -> f64 {
    if v > 0.0 {
        1.0
    } else if v < 0.0 {
        -1.0
    } else {
        0.0
    }
}

/// Positive root of `l(r³ + r) = s` by Newton's method from above.
fn quartic_radius(l: f64, s: f64) -> f64 {
    if s <= 0.0 {
        return 0.0;
    }
    let t = s / l;
    let mut r = t.min(t.cbrt());
    for _ in 0..200 {
        let next = r - (r * r * r + r - t) / (3.0 * r * r + 1.0);
        if !(next < r) {
            break;
        }
        r = next;
    }
    r
}

impl LegendrePair {
    /// φ(x) = ‖x‖²/(2λ).
    pub fn quadratic(lambda: f64, dim: usize) -> Result<Self> {
        let lambda = positive("lambda", lambda)?;
        Ok(LegendrePair { kind: Kind::Quadratic { lambda }, dim, label: format!("quadratic({lambda})") })
    }

    /// φ(x) = c Σ|xᵢ|ᵖ/p.
    pub fn power_even(p: f64, c: f64, dim: usize) -> Result<Self> {
        if !(p.is_finite() && p > 1.0) {
            return Err(Error::InvalidParameter(format!("p must exceed 1, got {p}")));
        }
        let c = positive("c", c)?;
        Ok(LegendrePair { kind: Kind::PowerEven { p, c }, dim, label: format!("power_even({p},{c})") })
    }

    /// φ(x) = (L/4)‖x‖⁴ + (L/2)‖x‖².
    pub fn quartic_quadratic(l: f64, dim: usize) -> Result<Self> {
        let l = positive("L", l)?;
        Ok(LegendrePair { kind: Kind::QuarticQuadratic { l }, dim, label: format!("quartic_quadratic({l})") })
    }

    /// φ(x) = |x|³/3 on ℝ.
    pub fn cubic_abs() -> Self {
        LegendrePair { kind: Kind::PowerEven { p: 3.0, c: 1.0 }, dim: 1, label: "cubic_abs".into() }
    }

    /// φ(x) = (2/3)|x|^{3/2} on ℝ.
    pub fn three_halves() -> Self {
        LegendrePair { kind: Kind::PowerEven { p: 1.5, c: 1.0 }, dim: 1, label: "three_halves".into() }
    }

    /// φ(x) = x₁² + x₂⁴ on ℝ².
    pub fn aniso_poly() -> Self {
        LegendrePair { kind: Kind::AnisoPoly, dim: 2, label: "aniso_poly".into() }
    }

    /// The pair generated by `L·φ`.
    pub fn scaled(&self, factor: f64) -> Result<Self> {
        let factor = positive("scale", factor)?;
        if factor == 1.0 {
            return Ok(self.clone());
        }
        Ok(LegendrePair {
            kind: Kind::Scaled { factor, inner: Box::new(self.clone()) },
            dim: self.dim,
            label: format!("{factor}*{}", self.label),
        })
    }

    /// `a₁⋆φ₁ □ a₂⋆φ₂ □ …` where `(a⋆φ)(x) = a·φ(x/a)`.
    ///
    /// The conjugate is `Σ aₖ φₖ*`. All-quadratic inputs collapse to a
    /// single quadratic; otherwise φ is evaluated by inverting ∇φ*, which is
    /// supported on ℝ only.
    pub fn epi_sum(parts: &[(f64, LegendrePair)]) -> Result<Self> {
        let first = parts.first().ok_or_else(|| Error::InvalidParameter("epi_sum of no parts".into()))?;
        let dim = first.1.dim;
        for (a, p) in parts {
            positive("epi-scaling factor", *a)?;
            check_dim(dim, p.dim)?;
        }
        let lambdas: Option<f64> = parts
            .iter()
            .map(|(a, p)| match p.kind {
                Kind::Quadratic { lambda } => Some(a * lambda),
                _ => None,
            })
            .sum();
        if let Some(lambda) = lambdas {
            return Self::quadratic(lambda, dim);
        }
        if dim != 1 {
            return Err(Error::InvalidParameter("non-quadratic epi_sum is only supported on the real line".into()));
        }
        let label = parts.iter().map(|(a, p)| format!("{a}*{}", p.label)).collect::<Vec<_>>().join(" # ");
        Ok(LegendrePair { kind: Kind::EpiSum { parts: parts.to_vec() }, dim, label: format!("epi({label})") })
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn label(&self) -> &str {
        &self.label
    }

    pub fn phi(&self, x: &[f64]) -> f64 {
        match &self.kind {
            Kind::Quadratic { lambda } => crate::dot(x, x) / (2.0 * lambda),
            Kind::PowerEven { p, c } => x.iter().map(|t| c * t.abs().powf(*p) / p).sum(),
            Kind::QuarticQuadratic { l } => {
                let s = crate::dot(x, x);
                l * s * s / 4.0 + l * s / 2.0
            }
            Kind::AnisoPoly => x[0] * x[0] + x[1].powi(4),
            Kind::Scaled { factor, inner } => factor * inner.phi(x),
            Kind::EpiSum { .. } => {
                let v = self.grad_phi(x);
                x[0] * v[0] - self.phi_star(&v)
            }
        }
    }

    /// Largest second difference of φ with step `h` along coordinate lines
    /// through the centre of the box `[lo, hi]`.
    pub fn curvature_bound(&self, lo: &[f64], hi: &[f64], h: f64) -> f64 {
        let mut c: f64 = 0.0;
        for i in 0..lo.len() {
            for k in 0..=64 {
                let mut x: Vec<f64> = lo.iter().zip(hi).map(|(a, b)| 0.5 * (a + b)).collect();
                x[i] = lo[i] + (hi[i] - lo[i]) * k as f64 / 64.0;
                let (mut a, mut b) = (x.clone(), x.clone());
                a[i] -= h;
                b[i] += h;
                c = c.max(((self.phi(&a) + self.phi(&b) - 2.0 * self.phi(&x)) / (h * h)).abs());
            }
        }
        c
    }

    pub fn grad_phi(&self, x: &[f64]) -> Vec<f64> {
        match &self.kind {
            Kind::Quadratic { lambda } => x.iter().map(|t| t / lambda).collect(),
            Kind::PowerEven { p, c } => x.iter().map(|t| c * sign(*t) * t.abs().powf(p - 1.0)).collect(),
            Kind::QuarticQuadratic { l } => {
                let k = l * (crate::dot(x, x) + 1.0);
                x.iter().map(|t| k * t).collect()
            }
            Kind::AnisoPoly => vec![2.0 * x[0], 4.0 * x[1].powi(3)],
            Kind::Scaled { factor, inner } => inner.grad_phi(x).into_iter().map(|t| factor * t).collect(),
            Kind::EpiSum { .. } => vec![self.invert_epi(x[0])],
        }
    }

    pub fn phi_star(&self, v: &[f64]) -> f64 {
        match &self.kind {
            Kind::Quadratic { lambda } => lambda * crate::dot(v, v) / 2.0,
            Kind::PowerEven { p, c } => {
                let q = p / (p - 1.0);
                v.iter().map(|s| s.abs() * (s.abs() / c).powf(1.0 / (p - 1.0)) / q).sum()
            }
            Kind::QuarticQuadratic { l } => {
                let s = crate::norm(v);
                let r = quartic_radius(*l, s);
                s * r - l * r.powi(4) / 4.0 - l * r * r / 2.0
            }
            Kind::AnisoPoly => v[0] * v[0] / 4.0 + 0.75 * v[1] * (v[1] / 4.0).cbrt(),
            Kind::Scaled { factor, inner } => {
                let w: Vec<f64> = v.iter().map(|t| t / factor).collect();
                factor * inner.phi_star(&w)
            }
            Kind::EpiSum { parts } => parts.iter().map(|(a, p)| a * p.phi_star(v)).sum(),
        }
    }

    pub fn grad_phi_star(&self, v: &[f64]) -> Vec<f64> {
        match &self.kind {
            Kind::Quadratic { lambda } => v.iter().map(|t| lambda * t).collect(),
            Kind::PowerEven { p, c } => v.iter().map(|s| sign(*s) * (s.abs() / c).powf(1.0 / (p - 1.0))).collect(),
            Kind::QuarticQuadratic { l } => {
                let s = crate::norm(v);
                if s == 0.0 {
                    return vec![0.0; v.len()];
                }
                let r = quartic_radius(*l, s);
                v.iter().map(|t| r * t / s).collect()
            }
            Kind::AnisoPoly => vec![v[0] / 2.0, (v[1] / 4.0).cbrt()],
            Kind::Scaled { factor, inner } => {
                let w: Vec<f64> = v.iter().map(|t| t / factor).collect();
                inner.grad_phi_star(&w)
            }
            Kind::EpiSum { parts } => {
                let mut g = vec![0.0; v.len()];
                for (a, p) in parts {
                    for (gi, pi) in g.iter_mut().zip(p.grad_phi_star(v)) {
                        *gi += a * pi;
                    }
                }
                g
            }
        }
    }

    fn invert_epi(&self, x: f64) -> f64 {
        let g = |v: f64| self.grad_phi_star(&[v])[0];
        if g(0.0) == x {
            return 0.0;
        }
        let (mut lo, mut hi) = (-1.0f64, 1.0f64);
        while g(lo) > x {
            lo *= 2.0;
        }
        while g(hi) < x {
            hi *= 2.0;
        }
        for _ in 0..400 {
            let mid = 0.5 * (lo + hi);
            if mid <= lo || mid >= hi {
                break;
            }
            if g(mid) < x {
                lo = mid;
            } else {
                hi = mid;
            }
        }
        if (g(lo) - x).abs() <= (g(hi) - x).abs() {
            lo
        } else {
            hi
        }
    }

    /// Bregman distance D(x, y) = φ(x) − φ(y) − ⟨∇φ(y), x − y⟩, clamped at 0.
    pub fn bregman(&self, x: &[f64], y: &[f64]) -> f64 {
        let g = self.grad_phi(y);
        let lin: f64 = g.iter().zip(x.iter().zip(y)).map(|(gi, (a, b))| gi * (a - b)).sum();
        (self.phi(x) - self.phi(y) - lin).max(0.0)
    }

    /// φ(0) = 0 and ∇φ(0) = 0.
    pub fn is_normalized(&self) -> bool {
        let z = vec![0.0; self.dim];
        self.phi(&z).abs() <= 1e-14 && self.grad_phi(&z).iter().all(|g| g.abs() <= 1e-14)
    }

    /// Whether φ splits as a sum of univariate terms.
    pub fn is_separable(&self) -> bool {
        match &self.kind {
            Kind::QuarticQuadratic { .. } => self.dim == 1,
            Kind::Scaled { inner, .. } => inner.is_separable(),
            _ => true,
        }
    }

    /// The `i`-th univariate term of a separable φ evaluated at `t`.
    pub fn coordinate_phi(&self, i: usize, t: f64) -> Option<f64> {
        match &self.kind {
            Kind::Quadratic { lambda } => Some(t * t / (2.0 * lambda)),
            Kind::PowerEven { p, c } => Some(c * t.abs().powf(*p) / p),
            Kind::AnisoPoly => Some(if i == 0 { t * t } else { t.powi(4) }),
            Kind::Scaled { factor, inner } => inner.coordinate_phi(i, t).map(|v| factor * v),
            Kind::QuarticQuadratic { .. } | Kind::EpiSum { .. } if self.dim == 1 => Some(self.phi(&[t])),
            _ => None,
        }
    }

    pub fn phi_function(&self) -> ScalarFunction {
        let (a, b) = (self.clone(), self.clone());
        ScalarFunction::smooth(self.dim, self.label.clone(), move |x| a.phi(x), move |x| b.grad_phi(x))
    }

    pub fn phi_star_function(&self) -> ScalarFunction {
        let (a, b) = (self.clone(), self.clone());
        ScalarFunction::smooth(self.dim, format!("{}*", self.label), move |v| a.phi_star(v), move |v| b.grad_phi_star(v))
    }
}
