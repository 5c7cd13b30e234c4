//! Numerical toolkit for Bregman and anisotropic notions of smoothness and
//! strong convexity.
//!
//! The crate provides
//! * an expression language with forward-mode dual-number derivatives ([`expr`]),
//! * Legendre reference pairs with closed-form conjugates and extended-real
//!   function handles ([`funcs`]),
//! * Bregman distances, Moreau/Klee envelopes and relative-convexity checks ([`bregman`]),
//! * discrete and Φ-conjugation, biconjugates and saddle probes ([`conjugacy`]),
//! * anisotropic inequality checks and dual-space-preconditioned descent ([`anisotropic`]),
//! * a registry of reproducible scenarios ([`scenarios`]) and the CLI plumbing ([`cli`]).
//!
//! Every "holds" verdict is a sampling certificate over a finite plan.

pub mod anisotropic;
pub mod bregman;
pub mod cli;
pub mod conjugacy;
pub mod error;
pub mod expr;
pub mod funcs;
pub mod io;
pub mod report;
pub mod sampling;
pub mod scenarios;
mod search;

pub use error::{Error, Result};

pub(crate) fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

pub(crate) fn norm(a: &[f64]) -> f64 {
    dot(a, a).sqrt()
}
