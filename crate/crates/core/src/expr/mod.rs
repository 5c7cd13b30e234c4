//! Arithmetic expressions over `x1..xn` with forward-mode dual-number
//! derivatives and active-piece subgradient enumeration.
//!
//! ```
//! use aniso_core::expr::Expr;
//! let e = Expr::parse_str("x1^2 + x2^4").unwrap();
//! let d = e.eval_dual(&[-1.0, 0.0]).unwrap();
//! assert_eq!(d.value, 1.0);
//! assert_eq!(d.partials, vec![-2.0, 0.0]);
//! ```

mod dual;
mod lexer;
mod parser;

use std::fmt;

pub use dual::DualVector;
pub use lexer::{tokenize, Token, TokenKind};
pub use parser::parse;

use crate::error::{Error, Result};

/// Absolute tolerance on piece values for deciding that two pieces are tied.
pub const TIE_TOLERANCE: f64 = 1e-12;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Func {
    Sqrt,
    Exp,
    Log,
}

impl Func {
    pub fn name(self) -> &'static str {
        match self {
            Func::Sqrt => "sqrt",
            Func::Exp => "exp",
            Func::Log => "log",
        }
    }
}

/// Expression tree. Variables are 1-based (`Var(1)` is `x1`).
#[derive(Debug, Clone, PartialEq)]
pub enum Expr {
    Const(f64),
    Var(usize),
    Add(Box<Expr>, Box<Expr>),
    Sub(Box<Expr>, Box<Expr>),
    Mul(Box<Expr>, Box<Expr>),
    Div(Box<Expr>, Box<Expr>),
    Pow(Box<Expr>, Box<Expr>),
    Neg(Box<Expr>),
    Abs(Box<Expr>),
    Max(Vec<Expr>),
    Min(Vec<Expr>),
    Call(Func, Box<Expr>),
}

/// How `eval_dual` treats ties of `max`/`min` and `abs` at zero.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum KinkPolicy {
    /// Report a [`Error::Kink`] when a nondifferentiable tie is hit.
    #[default]
    Strict,
    /// First listed tied argument of `max`/`min` wins; `abs` takes the right derivative.
    OneSided,
}

impl Expr {
    /// Tokenizes and parses `source`.
    pub fn parse_str(source: &str) -> Result<Expr> {
        parse(&tokenize(source)?)
    }

    /// Largest variable index appearing in the tree.
    pub fn arity(&self) -> usize {
        match self {
            Expr::Const(_) => 0,
            Expr::Var(i) => *i,
            Expr::Add(a, b) | Expr::Sub(a, b) | Expr::Mul(a, b) | Expr::Div(a, b) | Expr::Pow(a, b) => {
                a.arity().max(b.arity())
            }
            Expr::Neg(a) | Expr::Abs(a) | Expr::Call(_, a) => a.arity(),
            Expr::Max(xs) | Expr::Min(xs) => xs.iter().map(Expr::arity).max().unwrap_or(0),
        }
    }

    pub fn depth(&self) -> usize {
        1 + match self {
            Expr::Const(_) | Expr::Var(_) => 0,
            Expr::Add(a, b) | Expr::Sub(a, b) | Expr::Mul(a, b) | Expr::Div(a, b) | Expr::Pow(a, b) => {
                a.depth().max(b.depth())
            }
            Expr::Neg(a) | Expr::Abs(a) | Expr::Call(_, a) => a.depth(),
            Expr::Max(xs) | Expr::Min(xs) => xs.iter().map(Expr::depth).max().unwrap_or(0),
        }
    }

    fn check_point(&self, point: &[f64]) -> Result<()> {
        let n = self.arity();
        if point.len() < n {
            return Err(Error::Dimension { expected: n, got: point.len() });
        }
        Ok(())
    }

    /// Plain floating-point evaluation.
    pub fn eval(&self, point: &[f64]) -> Result<f64> {
        self.check_point(point)?;
        self.eval_unchecked(point)
    }

    fn eval_unchecked(&self, x: &[f64]) -> Result<f64> {
        Ok(match self {
            Expr::Const(c) => *c,
            Expr::Var(i) => x[*i - 1],
            Expr::Add(a, b) => a.eval_unchecked(x)? + b.eval_unchecked(x)?,
            Expr::Sub(a, b) => a.eval_unchecked(x)? - b.eval_unchecked(x)?,
            Expr::Mul(a, b) => a.eval_unchecked(x)? * b.eval_unchecked(x)?,
            Expr::Div(a, b) => {
                let d = b.eval_unchecked(x)?;
                if d == 0.0 {
                    return Err(Error::Domain("division by zero".into()));
                }
                a.eval_unchecked(x)? / d
            }
            Expr::Pow(a, b) => power(a.eval_unchecked(x)?, b.eval_unchecked(x)?)?,
            Expr::Neg(a) => -a.eval_unchecked(x)?,
            Expr::Abs(a) => a.eval_unchecked(x)?.abs(),
            Expr::Max(xs) => {
                let mut m = f64::NEG_INFINITY;
                for e in xs {
                    m = m.max(e.eval_unchecked(x)?);
                }
                m
            }
            Expr::Min(xs) => {
                let mut m = f64::INFINITY;
                for e in xs {
                    m = m.min(e.eval_unchecked(x)?);
                }
                m
            }
            Expr::Call(f, a) => call(*f, a.eval_unchecked(x)?)?,
        })
    }

    /// Value and gradient; errors at nondifferentiable ties.
    pub fn eval_dual(&self, point: &[f64]) -> Result<DualVector> {
        self.eval_dual_with(point, KinkPolicy::Strict)
    }

    /// Value and gradient using the deterministic one-sided rule at kinks.
    pub fn eval_dual_one_sided(&self, point: &[f64]) -> Result<DualVector> {
        self.eval_dual_with(point, KinkPolicy::OneSided)
    }

    pub fn eval_dual_with(&self, point: &[f64], policy: KinkPolicy) -> Result<DualVector> {
        self.check_point(point)?;
        let n = point.len();
        match dual::eval(self, point, n, policy) {
            // A local kink may be smoothed by the enclosing expression, as in abs(x)^3.
            Err(Error::Kink(msg)) => {
                if dual::active(self, point, n)?.1.len() <= 1 {
                    dual::eval(self, point, n, KinkPolicy::OneSided)
                } else {
                    Err(Error::Kink(msg))
                }
            }
            other => other,
        }
    }

    /// Gradients of every piece active at `point` within [`TIE_TOLERANCE`].
    ///
    /// The limiting subdifferential of a max/min composition is contained in
    /// the convex hull of the returned vectors. Smooth points yield exactly one.
    pub fn active_gradients(&self, point: &[f64]) -> Result<Vec<Vec<f64>>> {
        self.check_point(point)?;
        Ok(dual::active(self, point, point.len())?.1)
    }
}

pub(crate) fn power(a: f64, b: f64) -> Result<f64> {
    let v = if b.fract() == 0.0 && b.abs() <= 64.0 {
        if a == 0.0 && b < 0.0 {
            return Err(Error::Domain("zero raised to a negative power".into()));
        }
        a.powi(b as i32)
    } else {
        if a < 0.0 {
            return Err(Error::Domain("negative base with non-integer exponent".into()));
        }
        a.powf(b)
    };
    if v.is_nan() {
        return Err(Error::Domain("undefined power".into()));
    }
    Ok(v)
}

pub(crate) fn call(f: Func, a: f64) -> Result<f64> {
    match f {
        Func::Sqrt if a < 0.0 => Err(Error::Domain("sqrt of a negative number".into())),
        Func::Log if a <= 0.0 => Err(Error::Domain("log of a nonpositive number".into())),
        Func::Sqrt => Ok(a.sqrt()),
        Func::Exp => Ok(a.exp()),
        Func::Log => Ok(a.ln()),
    }
}

fn write_const(f: &mut fmt::Formatter<'_>, c: f64) -> fmt::Result {
    if c.is_sign_negative() {
        write!(f, "(-{})", -c)
    } else {
        write!(f, "{c}")
    }
}

/// Canonical, fully parenthesized form.
impl fmt::Display for Expr {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let bin = |f: &mut fmt::Formatter<'_>, a: &Expr, op: &str, b: &Expr| write!(f, "({a} {op} {b})");
        let list = |f: &mut fmt::Formatter<'_>, name: &str, xs: &[Expr]| {
            write!(f, "{name}(")?;
            for (i, e) in xs.iter().enumerate() {
                if i > 0 {
                    write!(f, ", ")?;
                }
                write!(f, "{e}")?;
            }
            write!(f, ")")
        };
        match self {
            Expr::Const(c) => write_const(f, *c),
            Expr::Var(i) => write!(f, "x{i}"),
            Expr::Add(a, b) => bin(f, a, "+", b),
            Expr::Sub(a, b) => bin(f, a, "-", b),
            Expr::Mul(a, b) => bin(f, a, "*", b),
            Expr::Div(a, b) => bin(f, a, "/", b),
            Expr::Pow(a, b) => bin(f, a, "^", b),
            Expr::Neg(a) => write!(f, "(-{a})"),
            Expr::Abs(a) => write!(f, "abs({a})"),
            Expr::Max(xs) => list(f, "max", xs),
            Expr::Min(xs) => list(f, "min", xs),
            Expr::Call(func, a) => write!(f, "{}({a})", func.name()),
        }
    }
}

#[cfg(test)]
mod tests;
