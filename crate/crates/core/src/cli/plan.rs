//! Text syntax for sampling plans.
//!
//! * `grid:LO..HI/N[,LO..HI/N...]`, one axis per comma-separated item;
//! * `random:LO..HI[,LO..HI...]/COUNT[/SEED]`, the seed defaulting to the invocation seed;
//! * `points:X1,X2,...[;X1,X2,...]`;
//! * a JSON plan object such as `{"kind":"grid","lower":[0],"upper":[1],"counts":[11]}`.

use crate::error::{Error, Result};
use crate::sampling::SamplingPlan;

fn bad(s: &str, why: &str) -> Error {
    Error::Config(format!("invalid plan '{s}': {why}"))
}

fn number(s: &str, whole: &str) -> Result<f64> {
    s.trim().parse::<f64>().map_err(|_| bad(whole, &format!("cannot parse number '{}'", s.trim())))
}

fn range(s: &str, whole: &str) -> Result<(f64, f64)> {
    let (a, b) = s.split_once("..").ok_or_else(|| bad(whole, "expected LO..HI"))?;
    Ok((number(a, whole)?, number(b, whole)?))
}

fn count(s: &str, whole: &str) -> Result<usize> {
    s.trim().parse::<usize>().map_err(|_| bad(whole, &format!("cannot parse count '{}'", s.trim())))
}

pub fn parse_plan(text: &str, default_seed: u64) -> Result<SamplingPlan> {
    let s = text.trim();
    let plan = if s.starts_with('{') {
        serde_json::from_str::<SamplingPlan>(s).map_err(|e| bad(s, &e.to_string()))?
    } else if let Some(body) = s.strip_prefix("grid:") {
        let (mut lower, mut upper, mut counts) = (Vec::new(), Vec::new(), Vec::new());
        for axis in body.split(',') {
            let (r, n) = axis.split_once('/').ok_or_else(|| bad(s, "expected LO..HI/N per axis"))?;
            let (a, b) = range(r, s)?;
            lower.push(a);
            upper.push(b);
            counts.push(count(n, s)?);
        }
        SamplingPlan::Grid { lower, upper, counts }
    } else if let Some(body) = s.strip_prefix("random:") {
        let mut parts = body.split('/');
        let ranges = parts.next().unwrap_or_default();
        let n = count(parts.next().ok_or_else(|| bad(s, "expected /COUNT"))?, s)?;
        let seed = match parts.next() {
            Some(t) => t.trim().parse::<u64>().map_err(|_| bad(s, "cannot parse seed"))?,
            None => default_seed,
        };
        if parts.next().is_some() {
            return Err(bad(s, "too many '/' fields"));
        }
        let (lower, upper) = ranges.split(',').map(|r| range(r, s)).collect::<Result<Vec<_>>>()?.into_iter().unzip();
        SamplingPlan::Random { lower, upper, count: n, seed }
    } else if let Some(body) = s.strip_prefix("points:") {
        let points = body
            .split(';')
            .map(|p| p.split(',').map(|t| number(t, s)).collect::<Result<Vec<_>>>())
            .collect::<Result<Vec<_>>>()?;
        SamplingPlan::Points { points }
    } else {
        return Err(bad(s, "expected grid:, random:, points: or a JSON object"));
    };
    plan.validate()?;
    Ok(plan)
}
