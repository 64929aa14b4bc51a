//! Evaluation suite for multiple-human parsing.
//!
//! Image-level scores (pixel accuracy, mean accuracy, mIoU) come from a confusion
//! matrix over canvases built by pasting instances back into image space.
//! Instance-level scores (AP^p, PCP_50, AP^r) use greedy score-ordered matching
//! and all-points interpolated average precision.

mod canvas;
mod instance;
mod overlap;
mod report;
mod semantic;

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

pub use canvas::paste_instances;
pub use instance::{ap_p, ap_r, average_precision, PartApResult, RegionApResult};
pub use overlap::{ImageOverlaps, PreparedImage};
pub use report::{evaluate, ClassIou, EvalImage, EvalReport, ImageEvaluation};
pub use semantic::{semantic_scores, ConfusionMatrix, SemanticScores};

use crate::error::{Error, Result};

/// Similarity / IoU thresholds at which AP is computed.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "Vec<f64>", into = "Vec<f64>")]
pub struct MatchThresholds(Vec<f64>);

impl MatchThresholds {
    pub fn new(values: Vec<f64>) -> Result<Self> {
        if values.is_empty() {
            return Err(Error::InvalidInput("threshold list is empty".into()));
        }
        if let Some(t) = values.iter().find(|t| !(**t > 0.0 && **t < 1.0)) {
            return Err(Error::InvalidInput(format!("threshold {t} outside (0, 1)")));
        }
        if values.windows(2).any(|w| w[0] >= w[1]) {
            return Err(Error::InvalidInput(
                "thresholds must be strictly increasing".into(),
            ));
        }
        Ok(Self(values))
    }

    /// `0.1, 0.2, ..., 0.9`.
    pub fn mhp() -> Self {
        Self((1..=9).map(|k| k as f64 / 10.0).collect())
    }

    /// `0.50, 0.55, ..., 0.95`.
    pub fn coco() -> Self {
        Self((0..10).map(|k| (50 + 5 * k) as f64 / 100.0).collect())
    }

    pub fn values(&self) -> &[f64] {
        &self.0
    }

    pub fn key(t: f64) -> String {
        format!("{t}")
    }
}

impl Default for MatchThresholds {
    fn default() -> Self {
        Self::mhp()
    }
}

impl TryFrom<Vec<f64>> for MatchThresholds {
    type Error = Error;

    fn try_from(v: Vec<f64>) -> Result<Self> {
        Self::new(v)
    }
}

impl From<MatchThresholds> for Vec<f64> {
    fn from(t: MatchThresholds) -> Self {
        t.0
    }
}

impl FromStr for MatchThresholds {
    type Err = Error;

    /// Accepts `mhp`, `coco`, or a comma-separated list.
    fn from_str(s: &str) -> Result<Self> {
        match s.trim() {
            "mhp" => Ok(Self::mhp()),
            "coco" => Ok(Self::coco()),
            list => Self::new(
                list.split(',')
                    .map(|p| {
                        p.trim()
                            .parse::<f64>()
                            .map_err(|_| Error::InvalidInput(format!("bad threshold {p:?}")))
                    })
                    .collect::<Result<_>>()?,
            ),
        }
    }
}

impl fmt::Display for MatchThresholds {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let parts: Vec<String> = self.0.iter().map(|t| Self::key(*t)).collect();
        f.write_str(&parts.join(","))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn presets() {
        assert_eq!(MatchThresholds::mhp().values()[4], 0.5);
        assert_eq!(MatchThresholds::coco().values()[0], 0.5);
        assert_eq!(MatchThresholds::coco().values()[9], 0.95);
        assert_eq!(MatchThresholds::mhp().to_string(), "0.1,0.2,0.3,0.4,0.5,0.6,0.7,0.8,0.9");
    }

    #[test]
    fn validation() {
        assert!("0.5,0.4".parse::<MatchThresholds>().is_err());
        assert!("0.0,0.5".parse::<MatchThresholds>().is_err());
        assert!("0.5,1.0".parse::<MatchThresholds>().is_err());
        assert!("".parse::<MatchThresholds>().is_err());
        assert_eq!("0.25, 0.75".parse::<MatchThresholds>().unwrap().values(), &[0.25, 0.75]);
    }
}
