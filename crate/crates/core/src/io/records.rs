//! Scores output and synthetic-truth sidecar (JSON, version 1).

use std::collections::BTreeMap;
use std::path::Path;

use serde::{Deserialize, Serialize};

use super::{read_json, write_json};
use crate::error::{Error, Result};
use crate::types::QualityWeights;

pub const RECORDS_VERSION: u32 = 1;

/// Fused scores for every instance of a corpus, ordered by `(image_id, instance_id)`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ScoresFile {
    pub version: u32,
    pub threshold: f64,
    pub weights: QualityWeights,
    pub instances: Vec<ScoreEntry>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ScoreEntry {
    pub image_id: String,
    pub instance_id: String,
    pub instance_score: f64,
    /// Fused score per predicted category.
    pub part_scores: BTreeMap<usize, f64>,
    pub box_score: f64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub iou_score: Option<f64>,
    pub pixel_score: f64,
    pub part_pixel_scores: BTreeMap<usize, f64>,
}

impl ScoresFile {
    pub fn read(path: &Path) -> Result<Self> {
        let f: ScoresFile = read_json(path)?;
        if f.version != RECORDS_VERSION {
            return Err(Error::schema(
                path,
                "version",
                format!("unsupported version {}", f.version),
            ));
        }
        for (k, e) in f.instances.iter().enumerate() {
            let bad = std::iter::once(e.instance_score)
                .chain(e.part_scores.values().copied())
                .find(|v| v.is_nan() || !(0.0..=1.0).contains(v));
            if let Some(v) = bad {
                return Err(Error::schema(
                    path,
                    format!("instances[{k}]"),
                    format!("score {v} outside [0, 1]"),
                ));
            }
        }
        Ok(f)
    }

    pub fn write(&self, path: &Path) -> Result<()> {
        write_json(path, self)
    }

    /// Entries keyed by instance id.
    pub fn by_instance(&self) -> BTreeMap<&str, &ScoreEntry> {
        self.instances
            .iter()
            .map(|e| (e.instance_id.as_str(), e))
            .collect()
    }
}

/// True quality of each synthetic prediction, for oracle checks.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TruthSidecar {
    pub version: u32,
    pub instances: Vec<TruthEntry>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TruthEntry {
    pub instance_id: String,
    pub image_id: String,
    pub gt_instance_id: String,
    /// Mean part IoU against the source human.
    pub true_miou: f64,
    pub box_iou: f64,
    /// IoU per category present in the prediction or the human.
    pub part_iou: BTreeMap<usize, f64>,
}

impl TruthSidecar {
    pub fn read(path: &Path) -> Result<Self> {
        read_json(path)
    }

    pub fn write(&self, path: &Path) -> Result<()> {
        write_json(path, self)
    }
}
