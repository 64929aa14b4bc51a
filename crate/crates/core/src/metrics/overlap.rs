use crate::error::{Error, Result};
use crate::types::{GroundTruthInstance, ImageCanvas, PredictedMask};

/// Per-category pixel areas and pairwise intersections between the predicted
/// and ground-truth humans of one image.
///
/// Everything here is independent of prediction scores, so one instance serves
/// any number of re-scorings.
#[derive(Debug, Clone, PartialEq)]
pub struct ImageOverlaps {
    categories: usize,
    preds: usize,
    gts: usize,
    pred_area: Vec<u64>,
    gt_area: Vec<u64>,
    inter: Vec<u64>,
    similarity: Vec<f64>,
    pcp: Vec<f64>,
}

impl ImageOverlaps {
    /// Counts overlaps of every prediction against `gt_instances`, which may be any
    /// subset of the humans of `gt`.
    ///
    /// Ground-truth humans are disjoint in image space, so a single pass over each
    /// prediction's box suffices.
    pub fn compute(
        gt: &ImageCanvas,
        gt_instances: &[GroundTruthInstance],
        preds: &[PredictedMask],
        categories: usize,
    ) -> Result<Self> {
        let (np, ng, nc) = (preds.len(), gt_instances.len(), categories);
        let mut slot_of_owner = vec![usize::MAX; gt.owner_count()];
        for (g, inst) in gt_instances.iter().enumerate() {
            slot_of_owner[inst.owner()] = g;
        }

        let mut gt_area = vec![0u64; ng * nc];
        for (&k, &s) in gt.instance_index().iter().zip(gt.semantic()) {
            if k < 0 || s == 0 {
                continue;
            }
            let s = s as usize;
            if s >= nc {
                return Err(Error::InvalidInput(format!(
                    "image {}: ground-truth label {s} out of range for {nc} categories",
                    gt.image_id()
                )));
            }
            let g = slot_of_owner[k as usize];
            if g != usize::MAX {
                gt_area[g * nc + s] += 1;
            }
        }

        let mut pred_area = vec![0u64; np * nc];
        let mut inter = vec![0u64; np * ng * nc];
        let width = gt.width();
        for (p, m) in preds.iter().enumerate() {
            let b = m.bbox;
            if b.right() > gt.width() || b.bottom() > gt.height() {
                return Err(Error::Dimension(format!(
                    "instance {}: box {:?} exceeds {}x{} image {}",
                    m.instance_id,
                    b,
                    gt.height(),
                    gt.width(),
                    gt.image_id()
                )));
            }
            if m.labels.height() != b.height || m.labels.width() != b.width {
                return Err(Error::Dimension(format!(
                    "instance {}: box and label map sizes differ",
                    m.instance_id
                )));
            }
            let labels = m.labels.values();
            for dy in 0..b.height {
                let base = (b.y + dy) * width + b.x;
                for dx in 0..b.width {
                    let l = labels[dy * b.width + dx] as usize;
                    if l == 0 {
                        continue;
                    }
                    if l >= nc {
                        return Err(Error::InvalidInput(format!(
                            "instance {}: label {l} out of range for {nc} categories",
                            m.instance_id
                        )));
                    }
                    pred_area[p * nc + l] += 1;
                    let i = base + dx;
                    let k = gt.instance_index()[i];
                    if k >= 0 && gt.semantic()[i] as usize == l {
                        let g = slot_of_owner[k as usize];
                        if g != usize::MAX {
                            inter[(p * ng + g) * nc + l] += 1;
                        }
                    }
                }
            }
        }

        let mut out = Self {
            categories: nc,
            preds: np,
            gts: ng,
            pred_area,
            gt_area,
            inter,
            similarity: Vec::new(),
            pcp: Vec::new(),
        };
        let mut similarity = Vec::with_capacity(np * ng);
        let mut pcp = Vec::with_capacity(np * ng);
        for p in 0..np {
            for g in 0..ng {
                similarity.push(out.mean_part_iou(p, g));
                pcp.push(out.correct_part_fraction(p, g));
            }
        }
        out.similarity = similarity;
        out.pcp = pcp;
        Ok(out)
    }

    pub fn categories(&self) -> usize {
        self.categories
    }

    pub fn num_preds(&self) -> usize {
        self.preds
    }

    pub fn num_gt(&self) -> usize {
        self.gts
    }

    pub fn pred_area(&self, p: usize, c: usize) -> u64 {
        self.pred_area[p * self.categories + c]
    }

    pub fn gt_area(&self, g: usize, c: usize) -> u64 {
        self.gt_area[g * self.categories + c]
    }

    pub fn intersection(&self, p: usize, g: usize, c: usize) -> u64 {
        self.inter[(p * self.gts + g) * self.categories + c]
    }

    /// IoU of category `c` between prediction `p` and human `g`; `None` if the
    /// category is absent from both.
    pub fn part_iou(&self, p: usize, g: usize, c: usize) -> Option<f64> {
        let i = self.intersection(p, g, c);
        let union = self.pred_area(p, c) + self.gt_area(g, c) - i;
        (union > 0).then(|| i as f64 / union as f64)
    }

    /// Mean part IoU over the foreground categories present in either human.
    pub fn similarity(&self, p: usize, g: usize) -> f64 {
        self.similarity[p * self.gts + g]
    }

    /// Fraction of the ground-truth human's categories parsed with IoU > 0.5.
    pub fn pcp(&self, p: usize, g: usize) -> f64 {
        self.pcp[p * self.gts + g]
    }

    fn mean_part_iou(&self, p: usize, g: usize) -> f64 {
        let (sum, n) = (1..self.categories)
            .filter_map(|c| self.part_iou(p, g, c))
            .fold((0.0, 0usize), |(s, n), v| (s + v, n + 1));
        if n == 0 {
            0.0
        } else {
            sum / n as f64
        }
    }

    fn correct_part_fraction(&self, p: usize, g: usize) -> f64 {
        let present: Vec<usize> = (1..self.categories)
            .filter(|&c| self.gt_area(g, c) > 0)
            .collect();
        if present.is_empty() {
            return 0.0;
        }
        let good = present
            .iter()
            .filter(|&&c| self.part_iou(p, g, c).is_some_and(|v| v > 0.5))
            .count();
        good as f64 / present.len() as f64
    }
}

/// Score-independent evaluation state for one image.
#[derive(Debug, Clone, PartialEq)]
pub struct PreparedImage {
    pub image_id: String,
    pub pred_ids: Vec<String>,
    pub gt_ids: Vec<String>,
    pub overlaps: ImageOverlaps,
}

impl PreparedImage {
    pub fn new(gt: &ImageCanvas, preds: &[PredictedMask], categories: usize) -> Result<Self> {
        let gt_instances = gt.ground_truth_instances();
        let overlaps = ImageOverlaps::compute(gt, &gt_instances, preds, categories)?;
        Ok(Self {
            image_id: gt.image_id().to_owned(),
            pred_ids: preds.iter().map(|p| p.instance_id.clone()).collect(),
            gt_ids: gt_instances
                .iter()
                .map(|g| g.instance_id().to_owned())
                .collect(),
            overlaps,
        })
    }
}
