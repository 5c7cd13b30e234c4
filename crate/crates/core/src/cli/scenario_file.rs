//! JSON scenario files for `check --scenario`.

use clap::ValueEnum;
use serde::{Deserialize, Serialize};

use crate::conjugacy::CouplingKind;
use crate::error::{Error, Result};
use crate::funcs::{PairSpec, SubgradientPolicy};
use crate::sampling::SamplingPlan;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, ValueEnum)]
#[serde(rename_all = "kebab-case")]
pub enum CheckClass {
    BWeak,
    BStrong,
    BSmooth,
    AWeak,
    AStrong,
    ASmooth,
}

impl CheckClass {
    /// `+1` for strong, `−1` for weak and smooth classes.
    pub fn r(self) -> f64 {
        match self {
            CheckClass::BStrong | CheckClass::AStrong => 1.0,
            _ => -1.0,
        }
    }
}

/// A self-contained check description. Unknown keys are rejected.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ScenarioFile {
    /// Expression in `x1..xn`.
    pub f: String,
    pub pair: PairSpec,
    pub class: CheckClass,
    /// Optional sign flag; must agree with `class` when given.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub r: Option<i8>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub coupling: Option<CouplingKind>,
    pub probes: SamplingPlan,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub anchors: Option<SamplingPlan>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub tolerance: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub policy: Option<SubgradientPolicy>,
    /// Adds the far-field probe ring of the anisotropic checks (default on).
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub far_field: Option<bool>,
}

impl ScenarioFile {
    pub fn from_json(text: &str) -> Result<Self> {
        let file: ScenarioFile = serde_json::from_str(text).map_err(|e| Error::Config(format!("scenario file: {e}")))?;
        file.r_value()?;
        if let Some(t) = file.tolerance {
            if !(t.is_finite() && t >= 0.0) {
                return Err(Error::Config("scenario file: tolerance must be finite and nonnegative".into()));
            }
        }
        Ok(file)
    }

    pub fn r_value(&self) -> Result<f64> {
        let want = self.class.r();
        match self.r {
            None => Ok(want),
            Some(r) if r as f64 == want => Ok(want),
            Some(r) => Err(Error::Config(format!("scenario file: r = {r} contradicts class {:?}", self.class))),
        }
    }
}
