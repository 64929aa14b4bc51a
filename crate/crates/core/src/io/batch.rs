//! Corpus-level pipelines over a manifest: score, evaluate, prepare for sweeps.
//!
//! Work is split per image (or per instance) and merged in `(image_id,
//! instance_id)` order, so outputs do not depend on the worker count.

use std::collections::{BTreeMap, BTreeSet};

use super::manifest::Corpus;
use super::records::{ScoreEntry, ScoresFile, RECORDS_VERSION};
use crate::error::{Error, Result};
use crate::fusion::{QualityScore, RawScores, ScoredCorpus};
use crate::metrics::{EvalImage, EvalReport, ImageEvaluation, MatchThresholds, PreparedImage};
use crate::par;
use crate::pixel_score::PixelScoreConfig;
use crate::types::{ImageCanvas, PredictedMask, QualityWeights};

/// Instance indices in `(image_id, instance_id)` order.
fn ordered_instances(corpus: &Corpus) -> Vec<usize> {
    corpus
        .image_order()
        .into_iter()
        .flat_map(|slot| corpus.instances_of(slot).to_vec())
        .collect()
}

/// Scores every instance of `corpus`.
pub fn score_corpus(
    corpus: &Corpus,
    config: PixelScoreConfig,
    weights: QualityWeights,
) -> Result<ScoresFile> {
    let order = ordered_instances(corpus);
    let c = corpus.num_categories();
    let instances = par::try_map_range(order.len(), |i| {
        let rec = corpus.load_instance(order[i])?;
        let raw = RawScores::compute(&rec, c, config)?;
        let q = raw.fuse(weights)?;
        Ok::<_, Error>(ScoreEntry {
            image_id: rec.image_id().to_owned(),
            instance_id: raw.instance_id,
            instance_score: q.instance_score,
            part_scores: q.part_scores,
            box_score: raw.box_score,
            iou_score: raw.iou_score,
            pixel_score: raw.instance_pixel,
            part_pixel_scores: raw.category_pixel.as_map().clone(),
        })
    })?;
    Ok(ScoresFile {
        version: RECORDS_VERSION,
        threshold: config.threshold(),
        weights,
        instances,
    })
}

fn require_gt(corpus: &Corpus, slot: usize) -> Result<ImageCanvas> {
    corpus.load_gt(slot)?.ok_or_else(|| {
        Error::schema(
            corpus.path(),
            format!("images[{slot}].gt_path"),
            "evaluation needs ground truth for every image",
        )
    })
}

/// Checks that `scores` covers exactly the instances of `corpus`, each under the
/// right image.
fn check_score_coverage(corpus: &Corpus, scores: &ScoresFile) -> Result<()> {
    let manifest = corpus.manifest();
    let images: BTreeSet<&str> = manifest.images.iter().map(|i| i.image_id.as_str()).collect();
    let expected: BTreeMap<&str, &str> = manifest
        .instances
        .iter()
        .map(|i| (i.instance_id.as_str(), i.image_id.as_str()))
        .collect();
    let mut seen = BTreeSet::new();
    for e in &scores.instances {
        if !images.contains(e.image_id.as_str()) {
            return Err(Error::ImageSetMismatch(format!(
                "scores reference image {} which is not in the manifest",
                e.image_id
            )));
        }
        match expected.get(e.instance_id.as_str()) {
            None => {
                return Err(Error::ImageSetMismatch(format!(
                    "scores reference instance {} which is not in the manifest",
                    e.instance_id
                )))
            }
            Some(img) if *img != e.image_id => {
                return Err(Error::ImageSetMismatch(format!(
                    "instance {} belongs to image {img}, scores say {}",
                    e.instance_id, e.image_id
                )))
            }
            _ => {}
        }
        if !seen.insert(e.instance_id.as_str()) {
            return Err(Error::InvalidInput(format!(
                "instance {} is scored twice",
                e.instance_id
            )));
        }
    }
    if let Some(missing) = expected.keys().find(|id| !seen.contains(*id)) {
        return Err(Error::ScoreMissing(format!("no score for instance {missing}")));
    }
    Ok(())
}

/// Evaluates the predictions of `corpus`, ranked by `scores`, against its ground
/// truth. Pixel data is reduced per image, so memory stays bounded by the images
/// in flight.
pub fn evaluate_corpus(
    corpus: &Corpus,
    scores: &ScoresFile,
    thresholds: &MatchThresholds,
) -> Result<EvalReport> {
    check_score_coverage(corpus, scores)?;
    let by_id = scores.by_instance();
    let c = corpus.num_categories();
    let order = corpus.image_order();
    let parts = par::try_map_range(order.len(), |i| {
        let slot = order[i];
        let gt = require_gt(corpus, slot)?;
        let ks = corpus.instances_of(slot);
        let preds = ks
            .iter()
            .map(|&k| corpus.load_mask(k))
            .collect::<Result<Vec<_>>>()?;
        let scores = preds
            .iter()
            .map(|m| {
                let e = by_id[m.instance_id.as_str()];
                QualityScore {
                    instance_score: e.instance_score,
                    part_scores: e.part_scores.clone(),
                }
            })
            .collect();
        ImageEvaluation::compute(&EvalImage { gt, preds, scores }, c)
    })?;
    EvalReport::assemble(parts, corpus.categories(), thresholds)
}

/// Overlaps and raw scores of `corpus`, ready for [`crate::fusion::sweep_weights`].
pub fn prepare_sweep(corpus: &Corpus, config: PixelScoreConfig) -> Result<ScoredCorpus> {
    let c = corpus.num_categories();
    let order = corpus.image_order();
    let parts = par::try_map_range(order.len(), |i| {
        let slot = order[i];
        let gt = require_gt(corpus, slot)?;
        let mut masks: Vec<PredictedMask> = Vec::new();
        let mut raw = Vec::new();
        for &k in corpus.instances_of(slot) {
            let rec = corpus.load_instance(k)?;
            raw.push(RawScores::compute(&rec, c, config)?);
            masks.push(rec.mask());
        }
        Ok::<_, Error>((PreparedImage::new(&gt, &masks, c)?, raw))
    })?;
    let (images, raw) = parts.into_iter().unzip();
    ScoredCorpus::new(images, raw)
}
