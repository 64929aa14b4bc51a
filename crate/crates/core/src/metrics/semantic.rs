use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::types::ImageCanvas;

/// Pixel counts indexed `[ground truth][prediction]`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ConfusionMatrix {
    classes: usize,
    counts: Vec<u64>,
}

impl ConfusionMatrix {
    pub fn new(classes: usize) -> Self {
        Self {
            classes,
            counts: vec![0; classes * classes],
        }
    }

    pub fn classes(&self) -> usize {
        self.classes
    }

    pub fn get(&self, gt: usize, pred: usize) -> u64 {
        self.counts[gt * self.classes + pred]
    }

    pub fn accumulate(&mut self, pred: &ImageCanvas, gt: &ImageCanvas) -> Result<()> {
        if pred.height() != gt.height() || pred.width() != gt.width() {
            return Err(Error::Dimension(format!(
                "image {}: prediction {}x{} vs ground truth {}x{}",
                gt.image_id(),
                pred.height(),
                pred.width(),
                gt.height(),
                gt.width()
            )));
        }
        let n = self.classes;
        for (&p, &g) in pred.semantic().iter().zip(gt.semantic()) {
            let (p, g) = (p as usize, g as usize);
            if p >= n || g >= n {
                return Err(Error::InvalidInput(format!(
                    "image {}: label {} out of range for {n} classes",
                    gt.image_id(),
                    p.max(g)
                )));
            }
            self.counts[g * n + p] += 1;
        }
        Ok(())
    }

    pub fn merge(&mut self, other: &ConfusionMatrix) {
        for (a, b) in self.counts.iter_mut().zip(&other.counts) {
            *a += b;
        }
    }

    pub fn scores(&self) -> SemanticScores {
        let n = self.classes;
        let total: u64 = self.counts.iter().sum();
        let trace: u64 = (0..n).map(|c| self.get(c, c)).sum();
        let gt_totals: Vec<u64> = (0..n).map(|g| (0..n).map(|p| self.get(g, p)).sum()).collect();
        let pred_totals: Vec<u64> = (0..n).map(|p| (0..n).map(|g| self.get(g, p)).sum()).collect();

        let pix_acc = ratio(trace, total);
        let recalls: Vec<f64> = (0..n)
            .filter(|&c| gt_totals[c] > 0)
            .map(|c| ratio(self.get(c, c), gt_totals[c]))
            .collect();
        let per_class_iou: Vec<Option<f64>> = (0..n)
            .map(|c| {
                let tp = self.get(c, c);
                let union = gt_totals[c] + pred_totals[c] - tp;
                (union > 0).then(|| ratio(tp, union))
            })
            .collect();
        SemanticScores {
            pix_acc,
            mean_acc: mean(&recalls),
            miou: mean(&per_class_iou.iter().flatten().copied().collect::<Vec<_>>()),
            per_class_iou,
        }
    }
}

fn ratio(a: u64, b: u64) -> f64 {
    if b == 0 {
        0.0
    } else {
        a as f64 / b as f64
    }
}

pub(crate) fn mean(v: &[f64]) -> f64 {
    if v.is_empty() {
        0.0
    } else {
        v.iter().fold(0.0, |a, b| a + b) / v.len() as f64
    }
}

/// Image-level segmentation scores.
///
/// `per_class_iou[c]` is `None` for classes absent from both prediction and ground
/// truth; those classes are left out of `miou`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SemanticScores {
    pub pix_acc: f64,
    pub mean_acc: f64,
    pub per_class_iou: Vec<Option<f64>>,
    pub miou: f64,
}

/// Accumulates one confusion matrix over every image pair (matched by image id).
pub fn semantic_scores(
    pred: &[ImageCanvas],
    gt: &[ImageCanvas],
    classes: usize,
) -> Result<SemanticScores> {
    let mut by_id: BTreeMap<&str, &ImageCanvas> = BTreeMap::new();
    for g in gt {
        if by_id.insert(g.image_id(), g).is_some() {
            return Err(Error::ImageSetMismatch(format!(
                "duplicate ground-truth image {}",
                g.image_id()
            )));
        }
    }
    if pred.len() != gt.len() {
        return Err(Error::ImageSetMismatch(format!(
            "{} predicted vs {} ground-truth images",
            pred.len(),
            gt.len()
        )));
    }
    let mut cm = ConfusionMatrix::new(classes);
    for p in pred {
        let g = by_id.remove(p.image_id()).ok_or_else(|| {
            Error::ImageSetMismatch(format!("no ground truth for image {}", p.image_id()))
        })?;
        cm.accumulate(p, g)?;
    }
    Ok(cm.scores())
}

#[cfg(test)]
mod tests {
    use super::*;

    fn canvas(id: &str, h: usize, w: usize, sem: &[u8]) -> ImageCanvas {
        let owners = sem.iter().map(|&s| if s == 0 { -1 } else { 0 }).collect();
        ImageCanvas::new(id, h, w, sem.to_vec(), owners).unwrap()
    }

    #[test]
    fn perfect_prediction() {
        let g = canvas("a", 2, 2, &[0, 1, 2, 2]);
        let s = semantic_scores(&[g.clone()], &[g], 3).unwrap();
        assert_eq!((s.pix_acc, s.mean_acc, s.miou), (1.0, 1.0, 1.0));
        assert_eq!(s.per_class_iou, vec![Some(1.0); 3]);
    }

    #[test]
    fn all_background_against_half_foreground() {
        let g = canvas("a", 2, 2, &[1, 1, 0, 0]);
        let p = canvas("a", 2, 2, &[0, 0, 0, 0]);
        let s = semantic_scores(&[p], &[g], 3).unwrap();
        assert_eq!(s.per_class_iou, vec![Some(0.5), Some(0.0), None]);
        assert_eq!(s.miou, 0.25);
        assert_eq!(s.pix_acc, 0.5);
        assert_eq!(s.mean_acc, 0.5);
    }

    #[test]
    fn image_sets_must_match() {
        let g = canvas("a", 1, 1, &[0]);
        let p = canvas("b", 1, 1, &[0]);
        assert!(matches!(
            semantic_scores(&[p], &[g.clone()], 2),
            Err(Error::ImageSetMismatch(_))
        ));
        assert!(semantic_scores(&[], &[g], 2).is_err());
    }
}
