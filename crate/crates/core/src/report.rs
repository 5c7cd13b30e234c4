//! Verdicts, margins and witnesses produced by the checkers.

use serde::{Deserialize, Serialize};

use crate::io::ext_real;

/// Default absolute margin tolerance.
pub const DEFAULT_TOLERANCE: f64 = 1e-8;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Verdict {
    Holds,
    Violated,
    Inconclusive,
}

/// The sample at which the worst margin occurred.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize, Default)]
#[serde(deny_unknown_fields)]
pub struct Witness {
    /// Probe point `x`.
    pub point: Vec<f64>,
    /// Anchor `x̄`, for anchored inequalities.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub anchor: Option<Vec<f64>>,
    /// Subgradient `v̄` used at the anchor.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub subgradient: Option<Vec<f64>>,
    /// Coupling partner `ȳ`, for Φ-subgradient tests.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub dual: Option<Vec<f64>>,
}

/// Outcome of a sampled inequality check.
///
/// The margin of a sample is `lhs − rhs` of the tested inequality, so a
/// negative margin is a violation.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CheckReport {
    pub verdict: Verdict,
    #[serde(with = "ext_real")]
    pub worst_margin: f64,
    pub witness: Option<Witness>,
    pub samples_tested: u64,
    pub tolerance: f64,
    #[serde(default)]
    pub skipped: u64,
    #[serde(default)]
    pub notes: Vec<String>,
}

impl CheckReport {
    pub fn holds(&self) -> bool {
        self.verdict == Verdict::Holds
    }

    pub fn violated(&self) -> bool {
        self.verdict == Verdict::Violated
    }

    pub fn with_note(mut self, note: impl Into<String>) -> Self {
        self.notes.push(note.into());
        self
    }

    /// Downgrades a `holds` verdict to inconclusive.
    pub fn inconclusive_unless_violated(mut self, note: impl Into<String>) -> Self {
        if self.verdict == Verdict::Holds {
            self.verdict = Verdict::Inconclusive;
        }
        self.notes.push(note.into());
        self
    }
}

/// Running worst-margin reduction. Ties keep the earlier sample, so merging
/// per-worker trackers in index order is deterministic.
#[derive(Debug, Clone)]
pub struct MarginTracker {
    pub worst: f64,
    pub witness: Option<Witness>,
    pub samples: u64,
    pub skipped: u64,
}

impl Default for MarginTracker {
    fn default() -> Self {
        MarginTracker { worst: f64::INFINITY, witness: None, samples: 0, skipped: 0 }
    }
}

impl MarginTracker {
    pub fn new() -> Self {
        Self::default()
    }

    /// Records a margin; the witness closure runs only when it becomes the worst.
    #[inline]
    pub fn record(&mut self, margin: f64, witness: impl FnOnce() -> Witness) {
        self.samples += 1;
        let margin = if margin.is_nan() { f64::NEG_INFINITY } else { margin };
        if margin < self.worst || self.witness.is_none() {
            self.worst = margin;
            self.witness = Some(witness());
        }
    }

    pub fn skip(&mut self) {
        self.skipped += 1;
    }

    pub fn merge(mut self, other: MarginTracker) -> Self {
        self.samples += other.samples;
        self.skipped += other.skipped;
        if other.witness.is_some() && (other.worst < self.worst || self.witness.is_none()) {
            self.worst = other.worst;
            self.witness = other.witness;
        }
        self
    }

    pub fn merge_all(trackers: impl IntoIterator<Item = MarginTracker>) -> Self {
        trackers.into_iter().fold(MarginTracker::new(), MarginTracker::merge)
    }

    pub fn report(self, tolerance: f64) -> CheckReport {
        let verdict = if self.samples == 0 {
            Verdict::Inconclusive
        } else if self.worst < -tolerance {
            Verdict::Violated
        } else {
            Verdict::Holds
        };
        let witness = if verdict == Verdict::Violated || self.samples > 0 { self.witness } else { None };
        let mut notes = Vec::new();
        if self.samples == 0 {
            notes.push("no samples tested".to_string());
        }
        CheckReport {
            verdict,
            worst_margin: self.worst,
            witness,
            samples_tested: self.samples,
            tolerance,
            skipped: self.skipped,
            notes,
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn verdict_rules() {
        let mut t = MarginTracker::new();
        t.record(0.5, || Witness { point: vec![1.0], ..Default::default() });
        t.record(-2e-8, || Witness { point: vec![2.0], ..Default::default() });
        let r = t.clone().report(1e-8);
        assert!(r.violated());
        assert_eq!(r.witness.unwrap().point, vec![2.0]);
        assert!(t.report(1e-7).holds());
        assert_eq!(MarginTracker::new().report(1e-8).verdict, Verdict::Inconclusive);
    }

    #[test]
    fn merge_keeps_earlier_on_ties() {
        let mut a = MarginTracker::new();
        a.record(-1.0, || Witness { point: vec![0.0], ..Default::default() });
        let mut b = MarginTracker::new();
        b.record(-1.0, || Witness { point: vec![1.0], ..Default::default() });
        let m = MarginTracker::merge_all([a, b]);
        assert_eq!(m.witness.unwrap().point, vec![0.0]);
        assert_eq!(m.samples, 2);
    }

    #[test]
    fn json_round_trip_with_infinite_margin() {
        let r = MarginTracker::new().report(1e-8);
        let s = serde_json::to_string(&r).unwrap();
        assert!(s.contains("\"inf\""));
        let back: CheckReport = serde_json::from_str(&s).unwrap();
        assert_eq!(back, r);
    }
}
