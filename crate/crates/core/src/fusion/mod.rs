//! Quality-aware fusion of box, IoU and pixel scores.
//!
//! The fused score is the weighted geometric mean
//! `(s_b^a * s_i^b * s_p^g)^(1 / (a + b + g))`. Factors whose weight is exactly
//! zero drop out entirely, so `(1, 0, 0)` returns the box score bit-for-bit.

mod sweep;

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

pub use sweep::{default_grid, sweep_weights, Objective, RawScores, ScoredCorpus, SweepRow};

use crate::error::{Error, Result};
use crate::pixel_score::CategoryPixelScores;
use crate::types::{check_unit, InstanceRecord, QualityWeights};

/// Fused scores for one instance and each of its predicted parts.
#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
pub struct QualityScore {
    pub instance_score: f64,
    pub part_scores: BTreeMap<usize, f64>,
}

/// Weighted geometric mean of the three quality signals.
pub fn fuse(s_b: f64, s_i: f64, s_p: f64, w: QualityWeights) -> Result<f64> {
    check_unit("box score", s_b)?;
    check_unit("IoU score", s_i)?;
    check_unit("pixel score", s_p)?;
    let terms = [(s_b, w.alpha()), (s_i, w.beta()), (s_p, w.gamma())];
    let active = || terms.iter().filter(|(_, wt)| *wt > 0.0);

    let mut lo = f64::INFINITY;
    let mut hi = f64::NEG_INFINITY;
    let mut n = 0;
    for &(s, _) in active() {
        if s == 0.0 {
            return Ok(0.0);
        }
        lo = lo.min(s);
        hi = hi.max(s);
        n += 1;
    }
    if n == 1 || lo == hi {
        return Ok(lo);
    }
    let total: f64 = active().map(|(_, wt)| wt).sum();
    let log_mean = active().map(|(s, wt)| wt * s.ln()).sum::<f64>() / total;
    // keeps the result between the extreme inputs despite rounding in exp/ln
    Ok(log_mean.exp().clamp(lo, hi))
}

/// Fuses `S_b`, `S_i` and the pixel scores of one instance.
///
/// The instance's box and IoU scores are shared by every part; only the pixel
/// score varies per part. A missing IoU score is an error unless `beta == 0`.
pub fn score_instance(
    rec: &InstanceRecord,
    cps: &CategoryPixelScores,
    inst_ps: f64,
    w: QualityWeights,
) -> Result<QualityScore> {
    let s_i = iou_or_placeholder(rec.iou_score(), w, rec.instance_id())?;
    fuse_scores(rec.box_score(), s_i, inst_ps, cps, w)
}

pub(crate) fn iou_or_placeholder(s_i: Option<f64>, w: QualityWeights, id: &str) -> Result<f64> {
    match s_i {
        Some(s) => Ok(s),
        None if w.beta() == 0.0 => Ok(1.0),
        None => Err(Error::ScoreMissing(format!(
            "instance {id} has no IoU score but beta = {}",
            w.beta()
        ))),
    }
}

pub(crate) fn fuse_scores(
    s_b: f64,
    s_i: f64,
    inst_ps: f64,
    cps: &CategoryPixelScores,
    w: QualityWeights,
) -> Result<QualityScore> {
    let instance_score = fuse(s_b, s_i, inst_ps, w)?;
    let part_scores = cps
        .iter()
        .map(|(c, s_p)| Ok((c, fuse(s_b, s_i, s_p, w)?)))
        .collect::<Result<_>>()?;
    Ok(QualityScore {
        instance_score,
        part_scores,
    })
}
