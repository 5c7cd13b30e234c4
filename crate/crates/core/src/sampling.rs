//! Deterministic sampling plans shared by all checkers.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{check_dim, Error, Result};

/// A finite set of sample points.
///
/// Grid points are ordered lexicographically with the last coordinate
/// varying fastest; coordinate `i` of grid index `k` is
/// `lower + (upper − lower)·k/(count − 1)`, so integer-valued nodes are exact.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum SamplingPlan {
    Grid { lower: Vec<f64>, upper: Vec<f64>, counts: Vec<usize> },
    Random { lower: Vec<f64>, upper: Vec<f64>, count: usize, seed: u64 },
    Points { points: Vec<Vec<f64>> },
}

impl SamplingPlan {
    pub fn grid(lower: Vec<f64>, upper: Vec<f64>, counts: Vec<usize>) -> Result<Self> {
        let plan = SamplingPlan::Grid { lower, upper, counts };
        plan.validate()?;
        Ok(plan)
    }

    /// Uniform 1-D grid.
    pub fn grid1(lo: f64, hi: f64, count: usize) -> Self {
        SamplingPlan::Grid { lower: vec![lo], upper: vec![hi], counts: vec![count] }
    }

    pub fn random(lower: Vec<f64>, upper: Vec<f64>, count: usize, seed: u64) -> Result<Self> {
        let plan = SamplingPlan::Random { lower, upper, count, seed };
        plan.validate()?;
        Ok(plan)
    }

    pub fn points(points: Vec<Vec<f64>>) -> Result<Self> {
        let plan = SamplingPlan::Points { points };
        plan.validate()?;
        Ok(plan)
    }

    pub fn validate(&self) -> Result<()> {
        let bounds = |lower: &[f64], upper: &[f64]| -> Result<()> {
            check_dim(lower.len(), upper.len())?;
            if lower.is_empty() {
                return Err(Error::EmptyPlan);
            }
            if lower.iter().zip(upper).any(|(a, b)| !(a.is_finite() && b.is_finite() && a <= b)) {
                return Err(Error::InvalidParameter("plan bounds must be finite with lower <= upper".into()));
            }
            Ok(())
        };
        match self {
            SamplingPlan::Grid { lower, upper, counts } => {
                bounds(lower, upper)?;
                check_dim(lower.len(), counts.len())?;
                if counts.iter().any(|&c| c == 0) {
                    return Err(Error::EmptyPlan);
                }
                if lower.iter().zip(upper).zip(counts).any(|((a, b), &c)| c == 1 && a != b) {
                    return Err(Error::InvalidParameter("a single-node axis needs lower == upper".into()));
                }
            }
            SamplingPlan::Random { lower, upper, count, .. } => {
                bounds(lower, upper)?;
                if *count == 0 {
                    return Err(Error::EmptyPlan);
                }
            }
            SamplingPlan::Points { points } => {
                let first = points.first().ok_or(Error::EmptyPlan)?;
                if first.is_empty() {
                    return Err(Error::EmptyPlan);
                }
                for p in points {
                    check_dim(first.len(), p.len())?;
                    if p.iter().any(|v| !v.is_finite()) {
                        return Err(Error::InvalidParameter("plan points must be finite".into()));
                    }
                }
            }
        }
        Ok(())
    }

    pub fn dim(&self) -> usize {
        match self {
            SamplingPlan::Grid { lower, .. } | SamplingPlan::Random { lower, .. } => lower.len(),
            SamplingPlan::Points { points } => points.first().map_or(0, Vec::len),
        }
    }

    pub fn len(&self) -> usize {
        match self {
            SamplingPlan::Grid { counts, .. } => counts.iter().product(),
            SamplingPlan::Random { count, .. } => *count,
            SamplingPlan::Points { points } => points.len(),
        }
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    /// Node coordinates per axis, for grid plans.
    pub fn axes(&self) -> Option<Vec<Vec<f64>>> {
        match self {
            SamplingPlan::Grid { lower, upper, counts } => Some(
                lower
                    .iter()
                    .zip(upper)
                    .zip(counts)
                    .map(|((&a, &b), &c)| axis(a, b, c))
                    .collect(),
            ),
            _ => None,
        }
    }

    /// Grid spacing per axis (0 for single-node axes).
    pub fn spacing(&self) -> Option<Vec<f64>> {
        match self {
            SamplingPlan::Grid { lower, upper, counts } => Some(
                lower
                    .iter()
                    .zip(upper)
                    .zip(counts)
                    .map(|((a, b), &c)| if c > 1 { (b - a) / (c - 1) as f64 } else { 0.0 })
                    .collect(),
            ),
            _ => None,
        }
    }

    /// Bounding box of the plan.
    pub fn bounds(&self) -> (Vec<f64>, Vec<f64>) {
        match self {
            SamplingPlan::Grid { lower, upper, .. } | SamplingPlan::Random { lower, upper, .. } => {
                (lower.clone(), upper.clone())
            }
            SamplingPlan::Points { points } => {
                let n = self.dim();
                let mut lo = vec![f64::INFINITY; n];
                let mut hi = vec![f64::NEG_INFINITY; n];
                for p in points {
                    for i in 0..n {
                        lo[i] = lo[i].min(p[i]);
                        hi[i] = hi[i].max(p[i]);
                    }
                }
                (lo, hi)
            }
        }
    }

    /// All points in plan order.
    pub fn points_vec(&self) -> Vec<Vec<f64>> {
        match self {
            SamplingPlan::Grid { counts, .. } => {
                let axes = self.axes().unwrap_or_default();
                let total: usize = counts.iter().product();
                let mut out = Vec::with_capacity(total);
                let mut idx = vec![0usize; counts.len()];
                for _ in 0..total {
                    out.push(idx.iter().zip(&axes).map(|(&k, a)| a[k]).collect());
                    for d in (0..counts.len()).rev() {
                        idx[d] += 1;
                        if idx[d] < counts[d] {
                            break;
                        }
                        idx[d] = 0;
                    }
                }
                out
            }
            SamplingPlan::Random { lower, upper, count, seed } => {
                let mut rng = ChaCha8Rng::seed_from_u64(*seed);
                (0..*count)
                    .map(|_| {
                        lower
                            .iter()
                            .zip(upper)
                            .map(|(&a, &b)| if a == b { a } else { rng.gen_range(a..b) })
                            .collect()
                    })
                    .collect()
            }
            SamplingPlan::Points { points } => points.clone(),
        }
    }

    /// Whether point `k` lies on the boundary of a grid plan.
    pub fn is_boundary_index(&self, k: usize) -> bool {
        match self {
            SamplingPlan::Grid { counts, .. } => {
                let mut rem = k;
                for &c in counts.iter().rev() {
                    let i = rem % c;
                    rem /= c;
                    if c > 1 && (i == 0 || i == c - 1) {
                        return true;
                    }
                }
                false
            }
            _ => false,
        }
    }

    /// Grid with every spacing halved.
    pub fn refined(&self) -> Self {
        match self {
            SamplingPlan::Grid { lower, upper, counts } => SamplingPlan::Grid {
                lower: lower.clone(),
                upper: upper.clone(),
                counts: counts.iter().map(|&c| if c > 1 { 2 * c - 1 } else { 1 }).collect(),
            },
            SamplingPlan::Random { lower, upper, count, seed } => SamplingPlan::Random {
                lower: lower.clone(),
                upper: upper.clone(),
                count: 2 * count,
                seed: *seed,
            },
            other => other.clone(),
        }
    }

    /// Concatenation of two plans of equal dimension, as explicit points.
    pub fn union(&self, other: &SamplingPlan) -> Result<Self> {
        check_dim(self.dim(), other.dim())?;
        let mut pts = self.points_vec();
        pts.extend(other.points_vec());
        SamplingPlan::points(pts)
    }
}

pub(crate) fn axis(a: f64, b: f64, c: usize) -> Vec<f64> {
    if c == 1 {
        return vec![a];
    }
    (0..c)
        .map(|k| {
            if k == c - 1 {
                b
            } else {
                a + (b - a) * k as f64 / (c - 1) as f64
            }
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn grid_nodes_are_exact() {
        let g = SamplingPlan::grid1(-10.0, 10.0, 2001);
        let pts = g.points_vec();
        assert_eq!(pts.len(), 2001);
        assert_eq!(pts[200][0], -8.0);
        assert_eq!(pts[1000][0], 0.0);
        assert_eq!(pts[2000][0], 10.0);
        let g2 = SamplingPlan::grid(vec![-10.0, -3.0], vec![10.0, 3.0], vec![21, 7]).unwrap();
        let pts = g2.points_vec();
        assert_eq!(pts[1], vec![-10.0, -2.0]);
        assert!(pts.contains(&vec![-8.0, -1.0]));
        assert!(g2.is_boundary_index(0));
        assert!(!g2.is_boundary_index(8));
    }

    #[test]
    fn random_plans_are_seeded() {
        let a = SamplingPlan::random(vec![0.0], vec![1.0], 5, 9).unwrap();
        assert_eq!(a.points_vec(), a.points_vec());
        let b = SamplingPlan::random(vec![0.0], vec![1.0], 5, 10).unwrap();
        assert_ne!(a.points_vec(), b.points_vec());
    }

    #[test]
    fn invalid_plans() {
        assert!(matches!(SamplingPlan::points(vec![]), Err(Error::EmptyPlan)));
        assert!(SamplingPlan::grid(vec![1.0], vec![0.0], vec![3]).is_err());
        assert!(SamplingPlan::grid(vec![0.0], vec![1.0], vec![0]).is_err());
        assert!(SamplingPlan::grid(vec![0.0, 0.0], vec![1.0], vec![3]).is_err());
    }

    #[test]
    fn json_rejects_unknown_keys() {
        let ok: SamplingPlan = serde_json::from_str(r#"{"kind":"grid","lower":[0],"upper":[1],"counts":[3]}"#).unwrap();
        assert_eq!(ok.len(), 3);
        assert!(serde_json::from_str::<SamplingPlan>(r#"{"kind":"grid","lower":[0],"upper":[1],"counts":[3],"x":1}"#).is_err());
    }

    #[test]
    fn refinement_halves_spacing() {
        let g = SamplingPlan::grid1(-2.0, 2.0, 4001);
        assert_eq!(g.refined().len(), 8001);
        assert_eq!(g.refined().spacing().unwrap()[0] * 2.0, g.spacing().unwrap()[0]);
    }
}
