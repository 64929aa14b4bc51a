use std::collections::BTreeMap;
use std::fmt::Write as _;

use serde::{Deserialize, Serialize};

use super::canvas::paste_instances;
use super::instance::{ap_p, ap_r};
use super::overlap::PreparedImage;
use super::semantic::ConfusionMatrix;
use super::MatchThresholds;
use crate::error::{Error, Result};
use crate::fusion::QualityScore;
use crate::par;
use crate::types::{ImageCanvas, PredictedMask};

/// Ground truth and scored predictions for one image.
#[derive(Debug, Clone)]
pub struct EvalImage {
    pub gt: ImageCanvas,
    pub preds: Vec<PredictedMask>,
    pub scores: Vec<QualityScore>,
}

/// Per-image evaluation state with the pixel data already reduced away.
#[derive(Debug, Clone)]
pub struct ImageEvaluation {
    pub confusion: ConfusionMatrix,
    pub prepared: PreparedImage,
    pub scores: Vec<QualityScore>,
}

impl ImageEvaluation {
    pub fn compute(image: &EvalImage, categories: usize) -> Result<Self> {
        if image.preds.len() != image.scores.len() {
            return Err(Error::ScoreMissing(format!(
                "image {}: {} predictions but {} scores",
                image.gt.image_id(),
                image.preds.len(),
                image.scores.len()
            )));
        }
        let instance_scores: Vec<f64> = image.scores.iter().map(|s| s.instance_score).collect();
        let pred_canvas = paste_instances(
            image.gt.image_id(),
            image.gt.height(),
            image.gt.width(),
            &image.preds,
            &instance_scores,
        )?;
        let mut confusion = ConfusionMatrix::new(categories);
        confusion.accumulate(&pred_canvas, &image.gt)?;
        Ok(Self {
            confusion,
            prepared: PreparedImage::new(&image.gt, &image.preds, categories)?,
            scores: image.scores.clone(),
        })
    }
}

/// IoU for one named class; `None` when absent from prediction and ground truth.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ClassIou {
    pub category: String,
    pub iou: Option<f64>,
}

/// The full evaluation summary.
///
/// Key names (struct fields here and `key: value` lines of [`EvalReport::to_text`])
/// are part of the output contract.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EvalReport {
    pub images: usize,
    pub instances: usize,
    pub gt_instances: usize,
    pub thresholds: Vec<f64>,
    pub pix_acc: f64,
    pub mean_acc: f64,
    pub miou: f64,
    pub per_class_iou: Vec<ClassIou>,
    pub ap_p: BTreeMap<String, f64>,
    pub ap_p_mean: f64,
    pub ap_p_50: f64,
    pub pcp_50: f64,
    pub ap_r: BTreeMap<String, f64>,
    pub ap_r_mean: f64,
    pub ap_r_50: f64,
}

impl EvalReport {
    /// Combines per-image results (in any fixed order) into the report.
    pub fn assemble(
        parts: Vec<ImageEvaluation>,
        categories: &[String],
        thresholds: &MatchThresholds,
    ) -> Result<Self> {
        let mut confusion = ConfusionMatrix::new(categories.len());
        let mut prepared = Vec::with_capacity(parts.len());
        let mut scores = Vec::with_capacity(parts.len());
        for part in parts {
            if part.confusion.classes() != categories.len() {
                return Err(Error::Dimension(format!(
                    "image {} was evaluated with {} classes, expected {}",
                    part.prepared.image_id,
                    part.confusion.classes(),
                    categories.len()
                )));
            }
            confusion.merge(&part.confusion);
            prepared.push(part.prepared);
            scores.push(part.scores);
        }
        let semantic = confusion.scores();
        let part_ap = ap_p(&prepared, &scores, thresholds)?;
        let region_ap = ap_r(&prepared, &scores, thresholds)?;
        let keyed = |v: &[f64]| -> BTreeMap<String, f64> {
            thresholds
                .values()
                .iter()
                .zip(v)
                .map(|(t, a)| (MatchThresholds::key(*t), *a))
                .collect()
        };
        Ok(Self {
            images: prepared.len(),
            instances: prepared.iter().map(|p| p.pred_ids.len()).sum(),
            gt_instances: prepared.iter().map(|p| p.gt_ids.len()).sum(),
            thresholds: thresholds.values().to_vec(),
            pix_acc: semantic.pix_acc,
            mean_acc: semantic.mean_acc,
            miou: semantic.miou,
            per_class_iou: categories
                .iter()
                .zip(&semantic.per_class_iou)
                .map(|(name, iou)| ClassIou {
                    category: name.clone(),
                    iou: *iou,
                })
                .collect(),
            ap_p: keyed(&part_ap.per_threshold),
            ap_p_mean: part_ap.mean,
            ap_p_50: part_ap.ap50,
            pcp_50: part_ap.pcp50,
            ap_r: keyed(&region_ap.per_threshold),
            ap_r_mean: region_ap.mean,
            ap_r_50: region_ap.ap50,
        })
    }

    /// `key: value` lines, one metric per line.
    pub fn to_text(&self) -> String {
        let mut s = String::new();
        let _ = writeln!(s, "images: {}", self.images);
        let _ = writeln!(s, "instances: {}", self.instances);
        let _ = writeln!(s, "gt_instances: {}", self.gt_instances);
        let _ = writeln!(s, "pix_acc: {}", self.pix_acc);
        let _ = writeln!(s, "mean_acc: {}", self.mean_acc);
        let _ = writeln!(s, "miou: {}", self.miou);
        for c in &self.per_class_iou {
            match c.iou {
                Some(v) => writeln!(s, "iou.{}: {v}", c.category),
                None => writeln!(s, "iou.{}: n/a", c.category),
            }
            .ok();
        }
        for t in &self.thresholds {
            let k = MatchThresholds::key(*t);
            let _ = writeln!(s, "ap_p@{k}: {}", self.ap_p[&k]);
        }
        let _ = writeln!(s, "ap_p: {}", self.ap_p_mean);
        let _ = writeln!(s, "ap_p_50: {}", self.ap_p_50);
        let _ = writeln!(s, "pcp_50: {}", self.pcp_50);
        for t in &self.thresholds {
            let k = MatchThresholds::key(*t);
            let _ = writeln!(s, "ap_r@{k}: {}", self.ap_r[&k]);
        }
        let _ = writeln!(s, "ap_r: {}", self.ap_r_mean);
        let _ = writeln!(s, "ap_r_50: {}", self.ap_r_50);
        s
    }

    pub fn to_json(&self) -> String {
        let mut s = serde_json::to_string_pretty(self).expect("report serializes");
        s.push('\n');
        s
    }
}

/// Evaluates an in-memory corpus. `categories[0]` names the background class.
pub fn evaluate(
    images: &[EvalImage],
    categories: &[String],
    thresholds: &MatchThresholds,
) -> Result<EvalReport> {
    let parts = par::try_map_range(images.len(), |i| {
        ImageEvaluation::compute(&images[i], categories.len())
    })?;
    EvalReport::assemble(parts, categories, thresholds)
}
