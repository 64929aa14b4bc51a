use std::fmt::Write as _;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use super::{fuse_scores, iou_or_placeholder, QualityScore};
use crate::error::{Error, Result};
use crate::metrics::{ap_p, ap_r, MatchThresholds, PreparedImage};
use crate::par;
use crate::pixel_score::{pixel_scores, CategoryPixelScores, PixelScoreConfig};
use crate::types::{InstanceRecord, QualityWeights};

/// Unfused quality signals for one prediction.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RawScores {
    pub instance_id: String,
    pub box_score: f64,
    pub iou_score: Option<f64>,
    pub instance_pixel: f64,
    pub category_pixel: CategoryPixelScores,
}

impl RawScores {
    /// Pixel scores of `rec` at `config`, plus its box and IoU scores.
    pub fn compute(rec: &InstanceRecord, categories: usize, config: PixelScoreConfig) -> Result<Self> {
        let (instance_pixel, category_pixel) =
            pixel_scores(rec.labels(), rec.probs(), categories, config)?;
        Ok(Self {
            instance_id: rec.instance_id().to_owned(),
            box_score: rec.box_score(),
            iou_score: rec.iou_score(),
            instance_pixel,
            category_pixel,
        })
    }

    pub fn fuse(&self, w: QualityWeights) -> Result<QualityScore> {
        let s_i = iou_or_placeholder(self.iou_score, w, &self.instance_id)?;
        fuse_scores(
            self.box_score,
            s_i,
            self.instance_pixel,
            &self.category_pixel,
            w,
        )
    }
}

/// Prepared overlaps plus raw scores: everything needed to re-rank under new weights.
#[derive(Debug, Clone)]
pub struct ScoredCorpus {
    images: Vec<PreparedImage>,
    raw: Vec<Vec<RawScores>>,
}

impl ScoredCorpus {
    pub fn new(images: Vec<PreparedImage>, raw: Vec<Vec<RawScores>>) -> Result<Self> {
        if images.len() != raw.len() {
            return Err(Error::Dimension(format!(
                "{} images but {} raw score lists",
                images.len(),
                raw.len()
            )));
        }
        for (im, r) in images.iter().zip(&raw) {
            if im.pred_ids.len() != r.len()
                || im.pred_ids.iter().zip(r).any(|(id, s)| *id != s.instance_id)
            {
                return Err(Error::ScoreMissing(format!(
                    "image {}: raw scores do not line up with predictions",
                    im.image_id
                )));
            }
        }
        Ok(Self { images, raw })
    }

    pub fn images(&self) -> &[PreparedImage] {
        &self.images
    }

    pub fn raw(&self) -> &[Vec<RawScores>] {
        &self.raw
    }

    pub fn rescore(&self, w: QualityWeights) -> Result<Vec<Vec<QualityScore>>> {
        self.raw
            .iter()
            .map(|r| r.iter().map(|s| s.fuse(w)).collect())
            .collect()
    }

    /// AP^p and AP^r under weights `w`.
    pub fn evaluate(&self, w: QualityWeights, thresholds: &MatchThresholds) -> Result<SweepRow> {
        let scores = self.rescore(w)?;
        let part = ap_p(&self.images, &scores, thresholds)?;
        let region = ap_r(&self.images, &scores, thresholds)?;
        Ok(SweepRow {
            weights: w,
            ap_p: part.mean,
            ap_p_50: part.ap50,
            ap_r: region.mean,
            ap_r_50: region.ap50,
        })
    }
}

/// Metric used to rank weight candidates.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
pub enum Objective {
    ApP,
    ApP50,
    #[default]
    ApR,
    ApR50,
}

impl Objective {
    pub fn of(&self, row: &SweepRow) -> f64 {
        match self {
            Objective::ApP => row.ap_p,
            Objective::ApP50 => row.ap_p_50,
            Objective::ApR => row.ap_r,
            Objective::ApR50 => row.ap_r_50,
        }
    }
}

impl FromStr for Objective {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "ap_p" => Ok(Objective::ApP),
            "ap_p_50" => Ok(Objective::ApP50),
            "ap_r" => Ok(Objective::ApR),
            "ap_r_50" => Ok(Objective::ApR50),
            _ => Err(Error::InvalidInput(format!(
                "unknown objective {s:?} (expected ap_p, ap_p_50, ap_r or ap_r_50)"
            ))),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SweepRow {
    pub weights: QualityWeights,
    pub ap_p: f64,
    pub ap_p_50: f64,
    pub ap_r: f64,
    pub ap_r_50: f64,
}

impl SweepRow {
    pub const TSV_HEADER: &'static str = "alpha\tbeta\tgamma\tap_p\tap_p_50\tap_r\tap_r_50";

    pub fn to_tsv_line(&self) -> String {
        let [a, b, g] = self.weights.as_array();
        format!(
            "{a}\t{b}\t{g}\t{}\t{}\t{}\t{}",
            self.ap_p, self.ap_p_50, self.ap_r, self.ap_r_50
        )
    }

    pub fn to_tsv(rows: &[SweepRow]) -> String {
        let mut s = String::from(Self::TSV_HEADER);
        s.push('\n');
        for r in rows {
            let _ = writeln!(s, "{}", r.to_tsv_line());
        }
        s
    }
}

/// Every `(alpha, beta, gamma)` over `{0, 0.5, 1, 2, 3}` except all zeros.
pub fn default_grid() -> Vec<QualityWeights> {
    const LEVELS: [f64; 5] = [0.0, 0.5, 1.0, 2.0, 3.0];
    let mut grid = Vec::with_capacity(124);
    for a in LEVELS {
        for b in LEVELS {
            for g in LEVELS {
                if let Ok(w) = QualityWeights::new(a, b, g) {
                    grid.push(w);
                }
            }
        }
    }
    grid
}

/// Re-fuses the corpus under every candidate and ranks candidates by `objective`
/// (descending), breaking ties by the weights in lexicographic order.
pub fn sweep_weights(
    corpus: &ScoredCorpus,
    grid: &[QualityWeights],
    objective: Objective,
    thresholds: &MatchThresholds,
) -> Result<Vec<SweepRow>> {
    if corpus.images.is_empty() || corpus.raw.iter().all(Vec::is_empty) {
        return Err(Error::InvalidInput("cannot sweep weights on an empty corpus".into()));
    }
    if grid.is_empty() {
        return Err(Error::InvalidInput("weight grid is empty".into()));
    }
    let mut rows = par::map(grid, |w| corpus.evaluate(*w, thresholds))
        .into_iter()
        .collect::<Result<Vec<_>>>()?;
    rows.sort_by(|a, b| {
        objective.of(b).total_cmp(&objective.of(a)).then_with(|| {
            let (wa, wb) = (a.weights.as_array(), b.weights.as_array());
            wa.iter()
                .zip(&wb)
                .map(|(x, y)| x.total_cmp(y))
                .find(|o| o.is_ne())
                .unwrap_or(std::cmp::Ordering::Equal)
        })
    });
    Ok(rows)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn default_grid_shape() {
        let g = default_grid();
        assert_eq!(g.len(), 124);
        assert!(g.contains(&QualityWeights::new(1.0, 0.5, 3.0).unwrap()));
    }

    #[test]
    fn objective_names() {
        assert_eq!("ap_r".parse::<Objective>().unwrap(), Objective::ApR);
        assert!("miou".parse::<Objective>().is_err());
    }

    #[test]
    fn empty_corpus_is_rejected() {
        let c = ScoredCorpus::new(vec![], vec![]).unwrap();
        assert!(sweep_weights(&c, &default_grid(), Objective::ApR, &MatchThresholds::mhp()).is_err());
    }
}
