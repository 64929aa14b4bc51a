use std::cmp::Ordering;

use serde::{Deserialize, Serialize};

use super::overlap::PreparedImage;
use super::MatchThresholds;
use crate::error::{Error, Result};
use crate::fusion::QualityScore;
use crate::par;

/// All-points interpolated average precision of a ranked detection list.
///
/// `tp[k]` says whether the k-th ranked detection is a true positive; `npos` is the
/// number of ground-truth objects. Precision is replaced by its running maximum
/// from the right before integrating over recall.
pub fn average_precision(tp: &[bool], npos: usize) -> f64 {
    if npos == 0 {
        return 0.0;
    }
    let mut precision = Vec::with_capacity(tp.len());
    let mut hits = 0usize;
    for (k, &hit) in tp.iter().enumerate() {
        hits += hit as usize;
        precision.push(hits as f64 / (k + 1) as f64);
    }
    for k in (0..precision.len().saturating_sub(1)).rev() {
        if precision[k + 1] > precision[k] {
            precision[k] = precision[k + 1];
        }
    }
    let area: f64 = tp
        .iter()
        .zip(&precision)
        .filter(|(hit, _)| **hit)
        .map(|(_, p)| *p)
        .fold(0.0, |acc, p| acc + p);
    area / npos as f64
}

/// Part-based AP over humans, plus PCP_50.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PartApResult {
    pub per_threshold: Vec<f64>,
    pub mean: f64,
    pub ap50: f64,
    pub pcp50: f64,
}

/// Region-based AP over part regions.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RegionApResult {
    pub per_threshold: Vec<f64>,
    pub mean: f64,
    pub ap50: f64,
}

/// A ranked detection: `(image, prediction, score)`.
type Ranked = (usize, usize, f64);

/// Sorts by score descending, then instance id, then image id.
fn rank(images: &[PreparedImage], mut dets: Vec<Ranked>) -> Vec<Ranked> {
    dets.sort_by(|a, b| {
        b.2.total_cmp(&a.2)
            .then_with(|| images[a.0].pred_ids[a.1].cmp(&images[b.0].pred_ids[b.1]))
            .then_with(|| images[a.0].image_id.cmp(&images[b.0].image_id))
            .then(Ordering::Equal)
    });
    dets
}

/// Greedy one-to-one matching of `ranked` detections (already in rank order)
/// against the candidate ground truths of each image. Returns the matched
/// ground-truth slot per ranked detection.
fn greedy_match<F>(
    ranked: &[Ranked],
    images: usize,
    gt_slots: &[Vec<usize>],
    threshold: f64,
    similarity: F,
) -> Vec<Option<usize>>
where
    F: Fn(usize, usize, usize) -> f64,
{
    let mut taken: Vec<Vec<bool>> = (0..images)
        .map(|i| vec![false; gt_slots[i].iter().max().map_or(0, |m| m + 1)])
        .collect();
    ranked
        .iter()
        .map(|&(i, p, _)| {
            let mut best: Option<(usize, f64)> = None;
            for &g in &gt_slots[i] {
                if taken[i][g] {
                    continue;
                }
                let s = similarity(i, p, g);
                if best.is_none_or(|(_, bs)| s > bs) {
                    best = Some((g, s));
                }
            }
            match best {
                Some((g, s)) if s >= threshold => {
                    taken[i][g] = true;
                    Some(g)
                }
                _ => None,
            }
        })
        .collect()
}

fn check_scores(images: &[PreparedImage], scores: &[Vec<QualityScore>]) -> Result<()> {
    if images.len() != scores.len() {
        return Err(Error::Dimension(format!(
            "{} images but {} score lists",
            images.len(),
            scores.len()
        )));
    }
    for (im, sc) in images.iter().zip(scores) {
        if im.pred_ids.len() != sc.len() {
            return Err(Error::ScoreMissing(format!(
                "image {}: {} predictions but {} scores",
                im.image_id,
                im.pred_ids.len(),
                sc.len()
            )));
        }
        if let Some(bad) = sc.iter().position(|q| q.instance_score.is_nan()) {
            return Err(Error::InvalidInput(format!(
                "instance {} has a NaN score",
                im.pred_ids[bad]
            )));
        }
    }
    Ok(())
}

fn thresholds_with_50(thresholds: &MatchThresholds) -> (Vec<f64>, usize) {
    let mut ts = thresholds.values().to_vec();
    match ts.iter().position(|&t| t == 0.5) {
        Some(k) => (ts, k),
        None => {
            ts.push(0.5);
            let k = ts.len() - 1;
            (ts, k)
        }
    }
}

/// Part-based AP: a prediction matches a human when their mean part IoU reaches
/// the threshold. PCP_50 averages, over every ground-truth human, the fraction of
/// its categories parsed with IoU > 0.5 by the prediction matched at 0.5
/// (unmatched humans count 0).
pub fn ap_p(
    images: &[PreparedImage],
    scores: &[Vec<QualityScore>],
    thresholds: &MatchThresholds,
) -> Result<PartApResult> {
    check_scores(images, scores)?;
    let npos: usize = images.iter().map(|im| im.overlaps.num_gt()).sum();
    let (ts, k50) = thresholds_with_50(thresholds);
    if npos == 0 {
        log::warn!("no ground-truth humans; AP^p and PCP_50 reported as 0");
        return Ok(PartApResult {
            per_threshold: vec![0.0; thresholds.values().len()],
            mean: 0.0,
            ap50: 0.0,
            pcp50: 0.0,
        });
    }

    let dets = images
        .iter()
        .enumerate()
        .flat_map(|(i, im)| (0..im.pred_ids.len()).map(move |p| (i, p, scores[i][p].instance_score)))
        .collect();
    let ranked = rank(images, dets);
    let gt_slots: Vec<Vec<usize>> = images
        .iter()
        .map(|im| (0..im.overlaps.num_gt()).collect())
        .collect();

    let matches: Vec<Vec<Option<usize>>> = par::map(&ts, |&t| {
        greedy_match(&ranked, images.len(), &gt_slots, t, |i, p, g| {
            images[i].overlaps.similarity(p, g)
        })
    });
    let aps: Vec<f64> = matches
        .iter()
        .map(|m| {
            let tp: Vec<bool> = m.iter().map(Option::is_some).collect();
            average_precision(&tp, npos)
        })
        .collect();

    // PCP over ground-truth humans in (image, slot) order
    let mut pcp_by_gt: Vec<Vec<f64>> = images
        .iter()
        .map(|im| vec![0.0; im.overlaps.num_gt()])
        .collect();
    for (&(i, p, _), g) in ranked.iter().zip(&matches[k50]) {
        if let Some(g) = *g {
            pcp_by_gt[i][g] = images[i].overlaps.pcp(p, g);
        }
    }
    let pcp50 = pcp_by_gt.iter().flatten().fold(0.0, |a, b| a + b) / npos as f64;

    let per_threshold = aps[..thresholds.values().len()].to_vec();
    Ok(PartApResult {
        mean: per_threshold.iter().fold(0.0, |a, b| a + b) / per_threshold.len() as f64,
        ap50: aps[k50],
        per_threshold,
        pcp50,
    })
}

/// Region-based AP: every category of every instance is one region, scored by the
/// instance's part score and matched to ground-truth regions of the same category
/// by mask IoU. Per-threshold AP averages the categories that have ground truth.
pub fn ap_r(
    images: &[PreparedImage],
    scores: &[Vec<QualityScore>],
    thresholds: &MatchThresholds,
) -> Result<RegionApResult> {
    check_scores(images, scores)?;
    let categories = images.first().map_or(0, |im| im.overlaps.categories());
    let (ts, k50) = thresholds_with_50(thresholds);

    // per category: Some(AP at each threshold) when it has ground truth
    let per_category: Vec<Option<Vec<f64>>> = par::try_map_range(categories.saturating_sub(1), |k| {
        let c = k + 1;
        let gt_slots: Vec<Vec<usize>> = images
            .iter()
            .map(|im| {
                (0..im.overlaps.num_gt())
                    .filter(|&g| im.overlaps.gt_area(g, c) > 0)
                    .collect()
            })
            .collect();
        let npos: usize = gt_slots.iter().map(Vec::len).sum();
        if npos == 0 {
            return Ok(None);
        }
        let mut dets = Vec::new();
        for (i, im) in images.iter().enumerate() {
            for p in 0..im.pred_ids.len() {
                if im.overlaps.pred_area(p, c) == 0 {
                    continue;
                }
                let s = scores[i][p].part_scores.get(&c).copied().ok_or_else(|| {
                    Error::ScoreMissing(format!(
                        "instance {} predicts category {c} but has no part score for it",
                        im.pred_ids[p]
                    ))
                })?;
                if s.is_nan() {
                    return Err(Error::InvalidInput(format!(
                        "instance {} has a NaN part score",
                        im.pred_ids[p]
                    )));
                }
                dets.push((i, p, s));
            }
        }
        let ranked = rank(images, dets);
        Ok(Some(
            ts.iter()
                .map(|&t| {
                    let m = greedy_match(&ranked, images.len(), &gt_slots, t, |i, p, g| {
                        images[i].overlaps.part_iou(p, g, c).unwrap_or(0.0)
                    });
                    let tp: Vec<bool> = m.iter().map(Option::is_some).collect();
                    average_precision(&tp, npos)
                })
                .collect(),
        ))
    })?;

    let scored: Vec<&Vec<f64>> = per_category.iter().flatten().collect();
    if scored.is_empty() {
        log::warn!("no ground-truth part regions; AP^r reported as 0");
        return Ok(RegionApResult {
            per_threshold: vec![0.0; thresholds.values().len()],
            mean: 0.0,
            ap50: 0.0,
        });
    }
    let at = |k: usize| scored.iter().fold(0.0, |a, v| a + v[k]) / scored.len() as f64;
    let per_threshold: Vec<f64> = (0..thresholds.values().len()).map(at).collect();
    Ok(RegionApResult {
        mean: per_threshold.iter().fold(0.0, |a, b| a + b) / per_threshold.len() as f64,
        ap50: at(k50),
        per_threshold,
    })
}
