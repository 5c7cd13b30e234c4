use super::{call, power, Expr, Func, KinkPolicy, TIE_TOLERANCE};
use crate::error::{Error, Result};

/// A value with its gradient with respect to `x1..xn`.
#[derive(Debug, Clone, PartialEq)]
pub struct DualVector {
    pub value: f64,
    pub partials: Vec<f64>,
}

impl DualVector {
    pub fn constant(value: f64, n: usize) -> Self {
        DualVector { value, partials: vec![0.0; n] }
    }

    pub fn variable(value: f64, index: usize, n: usize) -> Self {
        let mut partials = vec![0.0; n];
        partials[index] = 1.0;
        DualVector { value, partials }
    }

    fn map(self, value: f64, scale: f64) -> Self {
        let partials = if scale == 0.0 {
            vec![0.0; self.partials.len()]
        } else {
            self.partials.into_iter().map(|d| d * scale).collect()
        };
        DualVector { value, partials }
    }

    fn combine(a: &DualVector, b: &DualVector, value: f64, ca: f64, cb: f64) -> Self {
        let partials = a.partials.iter().zip(&b.partials).map(|(x, y)| ca * x + cb * y).collect();
        DualVector { value, partials }
    }

    fn is_constant(&self) -> bool {
        self.partials.iter().all(|d| *d == 0.0)
    }
}

fn same_partials(a: &[f64], b: &[f64]) -> bool {
    a.iter().zip(b).all(|(x, y)| (x - y).abs() <= TIE_TOLERANCE * (1.0 + x.abs().max(y.abs())))
}

fn unbounded() -> Error {
    Error::Domain("derivative unbounded".into())
}

pub(super) fn eval(e: &Expr, x: &[f64], n: usize, policy: KinkPolicy) -> Result<DualVector> {
    Ok(match e {
        Expr::Const(c) => DualVector::constant(*c, n),
        Expr::Var(i) => DualVector::variable(x[*i - 1], *i - 1, n),
        Expr::Add(a, b) => {
            let (a, b) = (eval(a, x, n, policy)?, eval(b, x, n, policy)?);
            DualVector::combine(&a, &b, a.value + b.value, 1.0, 1.0)
        }
        Expr::Sub(a, b) => {
            let (a, b) = (eval(a, x, n, policy)?, eval(b, x, n, policy)?);
            DualVector::combine(&a, &b, a.value - b.value, 1.0, -1.0)
        }
        Expr::Mul(a, b) => {
            let (a, b) = (eval(a, x, n, policy)?, eval(b, x, n, policy)?);
            DualVector::combine(&a, &b, a.value * b.value, b.value, a.value)
        }
        Expr::Div(a, b) => {
            let (a, b) = (eval(a, x, n, policy)?, eval(b, x, n, policy)?);
            if b.value == 0.0 {
                return Err(Error::Domain("division by zero".into()));
            }
            let q = a.value / b.value;
            DualVector::combine(&a, &b, q, 1.0 / b.value, -q / b.value)
        }
        Expr::Pow(a, b) => {
            let (a, b) = (eval(a, x, n, policy)?, eval(b, x, n, policy)?);
            let v = power(a.value, b.value)?;
            if b.is_constant() {
                if a.is_constant() {
                    return Ok(DualVector::constant(v, n));
                }
                let c = b.value * power(a.value, b.value - 1.0).map_err(|_| unbounded())?;
                if !c.is_finite() {
                    return Err(unbounded());
                }
                a.map(v, c)
            } else {
                if a.value <= 0.0 {
                    return Err(Error::Domain("variable exponent needs a positive base".into()));
                }
                let ln = a.value.ln();
                DualVector::combine(&a, &b, v, v * b.value / a.value, v * ln)
            }
        }
        Expr::Neg(a) => {
            let a = eval(a, x, n, policy)?;
            let v = -a.value;
            a.map(v, -1.0)
        }
        Expr::Abs(a) => {
            let a = eval(a, x, n, policy)?;
            if a.value.abs() <= TIE_TOLERANCE && !a.is_constant() {
                if policy == KinkPolicy::Strict {
                    return Err(Error::Kink(format!("abs at {}", a.value)));
                }
                let v = a.value.abs();
                return Ok(a.map(v, 1.0));
            }
            let v = a.value.abs();
            let s = if a.value < 0.0 { -1.0 } else { 1.0 };
            a.map(v, s)
        }
        Expr::Max(xs) | Expr::Min(xs) => {
            let is_max = matches!(e, Expr::Max(_));
            let parts = xs.iter().map(|p| eval(p, x, n, policy)).collect::<Result<Vec<_>>>()?;
            let best = parts
                .iter()
                .map(|p| p.value)
                .fold(if is_max { f64::NEG_INFINITY } else { f64::INFINITY }, |m, v| if is_max { m.max(v) } else { m.min(v) });
            let active: Vec<&DualVector> = parts.iter().filter(|p| (p.value - best).abs() <= TIE_TOLERANCE).collect();
            let first = active[0];
            if policy == KinkPolicy::Strict && active.iter().any(|p| !same_partials(&p.partials, &first.partials)) {
                return Err(Error::Kink(format!("{} tie at value {best}", if is_max { "max" } else { "min" })));
            }
            DualVector { value: best, partials: first.partials.clone() }
        }
        Expr::Call(f, a) => {
            let a = eval(a, x, n, policy)?;
            let v = call(*f, a.value)?;
            let c = match f {
                Func::Sqrt => {
                    if a.is_constant() {
                        0.0
                    } else if v == 0.0 {
                        return Err(unbounded());
                    } else {
                        0.5 / v
                    }
                }
                Func::Exp => v,
                Func::Log => 1.0 / a.value,
            };
            a.map(v, c)
        }
    })
}

type Active = (f64, Vec<Vec<f64>>);

fn push_unique(set: &mut Vec<Vec<f64>>, g: Vec<f64>) {
    if !set.iter().any(|h| same_partials(h, &g)) {
        set.push(g);
    }
}

fn cross(a: &Active, b: &Active, f: impl Fn(&[f64], &[f64]) -> Vec<f64>) -> Vec<Vec<f64>> {
    let mut out = Vec::new();
    for ga in &a.1 {
        for gb in &b.1 {
            push_unique(&mut out, f(ga, gb));
        }
    }
    out
}

fn scale_all(a: &Active, c: f64) -> Vec<Vec<f64>> {
    let mut out = Vec::new();
    for g in &a.1 {
        push_unique(&mut out, g.iter().map(|d| if c == 0.0 { 0.0 } else { c * d }).collect());
    }
    out
}

fn constant_set(a: &Active) -> bool {
    a.1.iter().all(|g| g.iter().all(|d| *d == 0.0))
}

pub(super) fn active(e: &Expr, x: &[f64], n: usize) -> Result<Active> {
    let lin = |ca: f64, cb: f64| move |a: &[f64], b: &[f64]| a.iter().zip(b).map(|(p, q)| ca * p + cb * q).collect::<Vec<_>>();
    Ok(match e {
        Expr::Const(c) => (*c, vec![vec![0.0; n]]),
        Expr::Var(i) => {
            let mut g = vec![0.0; n];
            g[*i - 1] = 1.0;
            (x[*i - 1], vec![g])
        }
        Expr::Add(a, b) => {
            let (a, b) = (active(a, x, n)?, active(b, x, n)?);
            (a.0 + b.0, cross(&a, &b, lin(1.0, 1.0)))
        }
        Expr::Sub(a, b) => {
            let (a, b) = (active(a, x, n)?, active(b, x, n)?);
            (a.0 - b.0, cross(&a, &b, lin(1.0, -1.0)))
        }
        Expr::Mul(a, b) => {
            let (a, b) = (active(a, x, n)?, active(b, x, n)?);
            (a.0 * b.0, cross(&a, &b, lin(b.0, a.0)))
        }
        Expr::Div(a, b) => {
            let (a, b) = (active(a, x, n)?, active(b, x, n)?);
            if b.0 == 0.0 {
                return Err(Error::Domain("division by zero".into()));
            }
            let q = a.0 / b.0;
            (q, cross(&a, &b, lin(1.0 / b.0, -q / b.0)))
        }
        Expr::Pow(a, b) => {
            let (a, b) = (active(a, x, n)?, active(b, x, n)?);
            let v = power(a.0, b.0)?;
            if constant_set(&b) {
                if constant_set(&a) {
                    return Ok((v, vec![vec![0.0; n]]));
                }
                let c = b.0 * power(a.0, b.0 - 1.0).map_err(|_| unbounded())?;
                if !c.is_finite() {
                    return Err(unbounded());
                }
                (v, scale_all(&a, c))
            } else {
                if a.0 <= 0.0 {
                    return Err(Error::Domain("variable exponent needs a positive base".into()));
                }
                (v, cross(&a, &b, lin(v * b.0 / a.0, v * a.0.ln())))
            }
        }
        Expr::Neg(a) => {
            let a = active(a, x, n)?;
            (-a.0, scale_all(&a, -1.0))
        }
        Expr::Abs(a) => {
            let a = active(a, x, n)?;
            let mut set = Vec::new();
            if a.0 >= -TIE_TOLERANCE {
                for g in scale_all(&a, 1.0) {
                    push_unique(&mut set, g);
                }
            }
            if a.0 <= TIE_TOLERANCE {
                for g in scale_all(&a, -1.0) {
                    push_unique(&mut set, g);
                }
            }
            (a.0.abs(), set)
        }
        Expr::Max(xs) | Expr::Min(xs) => {
            let is_max = matches!(e, Expr::Max(_));
            let parts = xs.iter().map(|p| active(p, x, n)).collect::<Result<Vec<_>>>()?;
            let best = parts
                .iter()
                .map(|p| p.0)
                .fold(if is_max { f64::NEG_INFINITY } else { f64::INFINITY }, |m, v| if is_max { m.max(v) } else { m.min(v) });
            let mut set = Vec::new();
            for p in parts.into_iter().filter(|p| (p.0 - best).abs() <= TIE_TOLERANCE) {
                for g in p.1 {
                    push_unique(&mut set, g);
                }
            }
            (best, set)
        }
        Expr::Call(f, a) => {
            let a = active(a, x, n)?;
            let v = call(*f, a.0)?;
            let c = match f {
                Func::Sqrt => {
                    if constant_set(&a) {
                        0.0
                    } else if v == 0.0 {
                        return Err(unbounded());
                    } else {
                        0.5 / v
                    }
                }
                Func::Exp => v,
                Func::Log => 1.0 / a.0,
            };
            (v, scale_all(&a, c))
        }
    })
}
