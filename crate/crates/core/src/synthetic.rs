//! Desk-scale stand-in for a trained parser.
//!
//! Ground-truth humans are layered composites (head, torso, arms, legs) whose
//! pixels are split into `C - 1` part categories by vertical band. Each human gets
//! one prediction: its box (optionally jittered), its labels (corrupted by part
//! swaps, erosion and boundary noise) and a probability tensor whose argmax is the
//! corrupted label. Confidence is high inside regions, decays toward region
//! boundaries whether or not the label there is right, and sits in a middling band
//! on mislabelled pixels. Box and IoU scores are the true box IoU / mask mIoU plus
//! Gaussian noise.
//!
//! Image `i` is generated from its own ChaCha8 stream seeded with
//! `splitmix64(seed + (i + 1) * 0x9E3779B97F4A7C15)`, so output does not depend on
//! the number of worker threads.

use std::collections::BTreeMap;
use std::path::{Path, PathBuf};

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Normal};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::fusion::{fuse, RawScores, ScoredCorpus};
use crate::io::{
    save_manifest, write_gt_canvas, write_label_map, write_prob_map, write_tensor, ImageEntry,
    InstanceEntry, Manifest, TruthEntry, TruthSidecar, MANIFEST_VERSION, RECORDS_VERSION,
};
use crate::metrics::{ImageOverlaps, PreparedImage};
use crate::par;
use crate::pixel_score::{pixel_scores, PixelScoreConfig};
use crate::types::{
    GroundTruthInstance, ImageCanvas, InstancePayload, InstanceRecord, PixelBox, PredictedMask,
    ProbabilityTensor, QualityWeights, MAX_CATEGORIES,
};

const MIN_HUMAN_WIDTH: usize = 6;
const MIN_HUMAN_HEIGHT: usize = 12;
const GOLDEN_GAMMA: u64 = 0x9E37_79B9_7F4A_7C15;

/// splitmix64 finalizer.
pub fn splitmix64(mut z: u64) -> u64 {
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

/// Seed of image `index`'s private stream.
pub fn image_seed(seed: u64, index: usize) -> u64 {
    splitmix64(seed.wrapping_add((index as u64 + 1).wrapping_mul(GOLDEN_GAMMA)))
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CorruptionConfig {
    /// Radius of label jitter around region boundaries.
    pub boundary_noise_px: u32,
    /// Mean probability that a whole part is relabelled as another part.
    pub part_swap_prob: f64,
    /// Inclusive range of silhouette erosion, drawn per instance.
    pub erosion_px: (u32, u32),
    /// Standard deviation of each box edge offset, as a fraction of the box side.
    pub box_jitter: f64,
    /// κ ≥ 1; larger pushes interior confidence toward 1.
    pub confidence_sharpness: f64,
    /// Confidence on the outermost ring of each region.
    pub confidence_floor: f64,
    /// Length scale of the confidence rise away from boundaries; 0 disables decay.
    pub boundary_decay_px: f64,
    /// Confidence range on mislabelled pixels.
    pub corrupted_confidence: (f64, f64),
}

impl CorruptionConfig {
    /// No corruption and near-certain confidence everywhere.
    pub fn none() -> Self {
        Self {
            boundary_noise_px: 0,
            part_swap_prob: 0.0,
            erosion_px: (0, 0),
            box_jitter: 0.0,
            confidence_sharpness: 1000.0,
            confidence_floor: 0.99,
            boundary_decay_px: 0.0,
            corrupted_confidence: (0.5, 0.5),
        }
    }
}

impl Default for CorruptionConfig {
    fn default() -> Self {
        Self {
            boundary_noise_px: 2,
            part_swap_prob: 0.15,
            erosion_px: (0, 2),
            box_jitter: 0.05,
            confidence_sharpness: 6.0,
            confidence_floor: 0.16,
            boundary_decay_px: 1.0,
            corrupted_confidence: (0.25, 0.55),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ScoreNoise {
    pub box_sigma: f64,
    pub iou_sigma: f64,
}

impl Default for ScoreNoise {
    fn default() -> Self {
        Self {
            box_sigma: 0.15,
            iou_sigma: 0.1,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SynthConfig {
    pub seed: u64,
    pub num_images: usize,
    /// Inclusive range of humans per image.
    pub humans_per_image: (usize, usize),
    pub categories: usize,
    pub height: usize,
    pub width: usize,
    pub corruption: CorruptionConfig,
    pub score_noise: ScoreNoise,
    /// Use the ground-truth box for every prediction and a box score of 1.
    pub gt_boxes: bool,
}

impl Default for SynthConfig {
    fn default() -> Self {
        Self {
            seed: 0,
            num_images: 50,
            humans_per_image: (1, 4),
            categories: 7,
            height: 96,
            width: 128,
            corruption: CorruptionConfig::default(),
            score_noise: ScoreNoise::default(),
            gt_boxes: false,
        }
    }
}

impl SynthConfig {
    /// Predictions identical to ground truth, noiseless scores.
    pub fn clean(seed: u64, num_images: usize) -> Self {
        Self {
            seed,
            num_images,
            corruption: CorruptionConfig::none(),
            score_noise: ScoreNoise {
                box_sigma: 0.0,
                iou_sigma: 0.0,
            },
            ..Self::default()
        }
    }

    /// Only boundary label noise (plus the usual confidence shaping).
    pub fn boundary_noise(seed: u64, num_images: usize) -> Self {
        Self {
            seed,
            num_images,
            corruption: CorruptionConfig {
                boundary_noise_px: 2,
                part_swap_prob: 0.0,
                erosion_px: (0, 0),
                box_jitter: 0.0,
                ..CorruptionConfig::default()
            },
            ..Self::default()
        }
    }

    /// Every corruption type at its default strength.
    pub fn mixed(seed: u64, num_images: usize) -> Self {
        Self {
            seed,
            num_images,
            ..Self::default()
        }
    }

    pub fn validate(&self) -> Result<()> {
        let bad = |msg: String| Err(Error::InvalidInput(msg));
        let c = &self.corruption;
        if !(2..MAX_CATEGORIES).contains(&self.categories) {
            return bad(format!("categories {} outside 2..{MAX_CATEGORIES}", self.categories));
        }
        let (lo, hi) = self.humans_per_image;
        if lo == 0 || lo > hi || hi > 255 {
            return bad(format!("humans_per_image range {lo}..={hi} is invalid"));
        }
        if self.height < MIN_HUMAN_HEIGHT || self.width / hi < MIN_HUMAN_WIDTH {
            return Err(Error::Generation(format!(
                "cannot fit {hi} humans of at least {MIN_HUMAN_WIDTH}x{MIN_HUMAN_HEIGHT} px \
                 into a {}x{} canvas",
                self.height, self.width
            )));
        }
        if !(0.0..=1.0).contains(&c.part_swap_prob) {
            return bad(format!("part_swap_prob {} outside [0, 1]", c.part_swap_prob));
        }
        if c.erosion_px.0 > c.erosion_px.1 {
            return bad(format!("erosion range {:?} is empty", c.erosion_px));
        }
        if !(c.box_jitter >= 0.0 && c.box_jitter.is_finite()) {
            return bad(format!("box_jitter {} must be >= 0", c.box_jitter));
        }
        if !(c.confidence_sharpness >= 1.0 && c.confidence_sharpness.is_finite()) {
            return bad(format!("confidence_sharpness {} must be >= 1", c.confidence_sharpness));
        }
        let floor = 1.0 / self.categories as f64;
        if !(c.confidence_floor > floor && c.confidence_floor <= 1.0) {
            return bad(format!(
                "confidence_floor {} must be in ({floor}, 1]",
                c.confidence_floor
            ));
        }
        let (a, b) = c.corrupted_confidence;
        if !(a > floor && a <= b && b <= 1.0) {
            return bad(format!("corrupted_confidence range ({a}, {b}) must lie in ({floor}, 1]"));
        }
        if !(c.boundary_decay_px >= 0.0 && c.boundary_decay_px.is_finite()) {
            return bad(format!("boundary_decay_px {} must be >= 0", c.boundary_decay_px));
        }
        for (name, s) in [
            ("box_sigma", self.score_noise.box_sigma),
            ("iou_sigma", self.score_noise.iou_sigma),
        ] {
            if !(s >= 0.0 && s.is_finite()) {
                return bad(format!("{name} {s} must be >= 0"));
            }
        }
        Ok(())
    }

    pub fn category_names(&self) -> Vec<String> {
        std::iter::once("background".to_string())
            .chain((1..self.categories).map(|c| format!("part{c}")))
            .collect()
    }
}

#[derive(Debug, Clone)]
pub struct SynthImage {
    pub gt: ImageCanvas,
    /// One prediction per ground-truth human, ordered by instance id.
    pub predictions: Vec<InstanceRecord>,
}

#[derive(Debug, Clone)]
pub struct SynthCorpus {
    pub categories: Vec<String>,
    pub images: Vec<SynthImage>,
    pub truth: TruthSidecar,
}

impl SynthCorpus {
    pub fn num_instances(&self) -> usize {
        self.images.iter().map(|im| im.predictions.len()).sum()
    }

    pub fn records(&self) -> impl Iterator<Item = &InstanceRecord> {
        self.images.iter().flat_map(|im| im.predictions.iter())
    }

    /// Overlaps and raw scores for weight sweeps, pixel scores taken at `config`.
    pub fn scored(&self, config: PixelScoreConfig) -> Result<ScoredCorpus> {
        let c = self.categories.len();
        let parts = par::try_map_range(self.images.len(), |i| {
            let im = &self.images[i];
            let masks: Vec<PredictedMask> = im.predictions.iter().map(InstanceRecord::mask).collect();
            let prepared = PreparedImage::new(&im.gt, &masks, c)?;
            let raw = im
                .predictions
                .iter()
                .map(|r| RawScores::compute(r, c, config))
                .collect::<Result<Vec<_>>>()?;
            Ok::<_, Error>((prepared, raw))
        })?;
        let (images, raw) = parts.into_iter().unzip();
        ScoredCorpus::new(images, raw)
    }

    /// The same corpus in the ground-truth box regime: every box score set to 1.
    pub fn with_unit_box_scores(mut self) -> Result<Self> {
        for im in &mut self.images {
            im.predictions = std::mem::take(&mut im.predictions)
                .into_iter()
                .map(|r| r.with_box_score(1.0))
                .collect::<Result<_>>()?;
        }
        Ok(self)
    }
}

pub fn generate(config: &SynthConfig) -> Result<SynthCorpus> {
    config.validate()?;
    let per_image = par::try_map_range(config.num_images, |i| generate_image(config, i))?;
    let mut images = Vec::with_capacity(per_image.len());
    let mut truth = Vec::new();
    for (im, t) in per_image {
        images.push(im);
        truth.extend(t);
    }
    Ok(SynthCorpus {
        categories: config.category_names(),
        images,
        truth: TruthSidecar {
            version: RECORDS_VERSION,
            instances: truth,
        },
    })
}

fn unit(rng: &mut ChaCha8Rng) -> f64 {
    rng.random::<f64>()
}

fn uniform(rng: &mut ChaCha8Rng, lo: f64, hi: f64) -> f64 {
    lo + (hi - lo) * unit(rng)
}

fn gaussian(rng: &mut ChaCha8Rng, sigma: f64) -> f64 {
    if sigma == 0.0 {
        0.0
    } else {
        Normal::new(0.0, sigma).expect("sigma validated").sample(rng)
    }
}

/// Body part membership at normalized box coordinates; returns false off-body.
fn on_body(u: f64, v: f64) -> bool {
    let head = ((u - 0.5) / 0.17).powi(2) + ((v - 0.1) / 0.1).powi(2) <= 1.0;
    let torso = (0.24..0.76).contains(&u) && (0.18..0.6).contains(&v);
    let arms = ((0.06..0.22).contains(&u) || (0.78..0.94).contains(&u)) && (0.2..0.56).contains(&v);
    let legs = ((0.26..0.47).contains(&u) || (0.53..0.74).contains(&u)) && (0.58..1.0).contains(&v);
    head || torso || arms || legs
}

fn generate_image(config: &SynthConfig, index: usize) -> Result<(SynthImage, Vec<TruthEntry>)> {
    let mut rng = ChaCha8Rng::seed_from_u64(image_seed(config.seed, index));
    let (h_img, w_img) = (config.height, config.width);
    let parts = config.categories - 1;
    let image_id = format!("img{index:06}");

    let n = rng.random_range(config.humans_per_image.0..=config.humans_per_image.1);
    let col_w = w_img as f64 / n as f64;
    let mut semantic = vec![0u8; h_img * w_img];
    let mut owner = vec![-1i32; h_img * w_img];
    for j in 0..n {
        let w = ((col_w * uniform(&mut rng, 0.7, 1.25)).round() as usize).clamp(MIN_HUMAN_WIDTH, w_img);
        let h = ((h_img as f64 * uniform(&mut rng, 0.45, 0.95)).round() as usize)
            .clamp(MIN_HUMAN_HEIGHT, h_img);
        let cx = col_w * (j as f64 + 0.5) + col_w * uniform(&mut rng, -0.2, 0.2);
        let x0 = (cx - w as f64 / 2.0).round().clamp(0.0, (w_img - w) as f64) as usize;
        let y0 = rng.random_range(0..=h_img - h);

        // occasionally a part is missing and its band takes a neighbour's category
        let mut category: Vec<u8> = (1..=parts as u8).collect();
        if parts > 1 {
            for c in 0..parts {
                if unit(&mut rng) < 0.15 {
                    let nb = if c == 0 { 1 } else { c - 1 };
                    category[c] = category[nb];
                }
            }
        }
        for dy in 0..h {
            let v = (dy as f64 + 0.5) / h as f64;
            let band = ((v * parts as f64) as usize).min(parts - 1);
            for dx in 0..w {
                let u = (dx as f64 + 0.5) / w as f64;
                if on_body(u, v) {
                    let i = (y0 + dy) * w_img + x0 + dx;
                    semantic[i] = category[band];
                    owner[i] = j as i32;
                }
            }
        }
    }
    // compact owner indices after occlusion
    let mut remap = vec![-1i32; n];
    let mut next = 0;
    for k in owner.iter().copied().filter(|&k| k >= 0) {
        if remap[k as usize] < 0 {
            remap[k as usize] = next;
            next += 1;
        }
    }
    // keep painter order stable: renumber by first appearance in original index order
    let mut by_original: Vec<i32> = (0..n as i32).filter(|&k| remap[k as usize] >= 0).collect();
    by_original.sort_unstable();
    for (new, &orig) in by_original.iter().enumerate() {
        remap[orig as usize] = new as i32;
    }
    for k in owner.iter_mut().filter(|k| **k >= 0) {
        *k = remap[*k as usize];
    }
    let gt = ImageCanvas::new(image_id.clone(), h_img, w_img, semantic, owner)?;

    let mut predictions = Vec::new();
    let mut truth = Vec::new();
    for human in gt.ground_truth_instances() {
        let (rec, t) = predict_human(config, &mut rng, &gt, &human)?;
        predictions.push(rec);
        truth.push(t);
    }
    Ok((SynthImage { gt, predictions }, truth))
}

/// Chessboard distance from every pixel to the nearest source pixel (two-pass
/// 8-connected transform; exact for the L∞ metric). `outside` treats the area
/// beyond the grid as sources.
fn chessboard_distance(sources: &[bool], h: usize, w: usize, outside: bool) -> Vec<u32> {
    let big = (h + w + 2) as u32;
    let mut d: Vec<u32> = sources.iter().map(|&s| if s { 0 } else { big }).collect();
    let edge = |y: isize, x: isize| -> bool { y < 0 || x < 0 || y >= h as isize || x >= w as isize };
    let at = |d: &Vec<u32>, y: isize, x: isize| -> u32 {
        if edge(y, x) {
            if outside {
                0
            } else {
                big
            }
        } else {
            d[y as usize * w + x as usize]
        }
    };
    for y in 0..h as isize {
        for x in 0..w as isize {
            let i = y as usize * w + x as usize;
            let m = [at(&d, y - 1, x - 1), at(&d, y - 1, x), at(&d, y - 1, x + 1), at(&d, y, x - 1)]
                .into_iter()
                .min()
                .unwrap();
            d[i] = d[i].min(m.saturating_add(1));
        }
    }
    for y in (0..h as isize).rev() {
        for x in (0..w as isize).rev() {
            let i = y as usize * w + x as usize;
            let m = [at(&d, y + 1, x + 1), at(&d, y + 1, x), at(&d, y + 1, x - 1), at(&d, y, x + 1)]
                .into_iter()
                .min()
                .unwrap();
            d[i] = d[i].min(m.saturating_add(1));
        }
    }
    d
}

/// Distance (≥ 1) from each pixel to the edge of its label region; the area
/// beyond the crop counts as background.
fn boundary_distance(labels: &[u8], h: usize, w: usize) -> Vec<u32> {
    let label_at = |y: isize, x: isize| -> u8 {
        if y < 0 || x < 0 || y >= h as isize || x >= w as isize {
            0
        } else {
            labels[y as usize * w + x as usize]
        }
    };
    let mut seeds = vec![false; h * w];
    for y in 0..h as isize {
        for x in 0..w as isize {
            let l = label_at(y, x);
            seeds[y as usize * w + x as usize] = (-1..=1)
                .flat_map(|dy| (-1..=1).map(move |dx| (dy, dx)))
                .any(|(dy, dx)| label_at(y + dy, x + dx) != l);
        }
    }
    chessboard_distance(&seeds, h, w, false)
        .into_iter()
        .map(|d| d + 1)
        .collect()
}

fn predict_human(
    config: &SynthConfig,
    rng: &mut ChaCha8Rng,
    gt: &ImageCanvas,
    human: &GroundTruthInstance,
) -> Result<(InstanceRecord, TruthEntry)> {
    let cc = &config.corruption;
    let n_cat = config.categories;
    let (h_img, w_img) = (gt.height(), gt.width());
    let gbox = human.bbox();
    let severity = unit(rng);

    let bbox = if config.gt_boxes || cc.box_jitter == 0.0 {
        gbox
    } else {
        let jitter = |rng: &mut ChaCha8Rng, side: usize| {
            (gaussian(rng, cc.box_jitter * side as f64)).round() as i64
        };
        let x0 = (gbox.x as i64 + jitter(rng, gbox.width)).clamp(0, w_img as i64 - 1);
        let y0 = (gbox.y as i64 + jitter(rng, gbox.height)).clamp(0, h_img as i64 - 1);
        let x1 = (gbox.right() as i64 + jitter(rng, gbox.width)).clamp(x0 + 1, w_img as i64);
        let y1 = (gbox.bottom() as i64 + jitter(rng, gbox.height)).clamp(y0 + 1, h_img as i64);
        PixelBox {
            x: x0 as usize,
            y: y0 as usize,
            width: (x1 - x0) as usize,
            height: (y1 - y0) as usize,
        }
    };
    let (bh, bw) = (bbox.height, bbox.width);

    // what a perfect parser of this human would output inside the box
    let target: Vec<u8> = (0..bh * bw)
        .map(|i| {
            let p = (bbox.y + i / bw) * w_img + bbox.x + i % bw;
            if gt.instance_index()[p] == human.owner() as i32 {
                gt.semantic()[p]
            } else {
                0
            }
        })
        .collect();

    let mut labels = target.clone();
    if cc.part_swap_prob > 0.0 && n_cat > 2 {
        let p_swap = (2.0 * severity * cc.part_swap_prob).min(1.0);
        let mut mapping: Vec<u8> = (0..n_cat as u8).collect();
        for c in 1..n_cat {
            if unit(rng) < p_swap {
                let mut other = rng.random_range(1..n_cat - 1);
                if other >= c {
                    other += 1;
                }
                mapping[c] = other as u8;
            }
        }
        for l in labels.iter_mut() {
            *l = mapping[*l as usize];
        }
    }
    let erosion = rng.random_range(cc.erosion_px.0..=cc.erosion_px.1);
    if erosion > 0 {
        let bg: Vec<bool> = labels.iter().map(|&l| l == 0).collect();
        let d = chessboard_distance(&bg, bh, bw, true);
        for (l, d) in labels.iter_mut().zip(d) {
            if d <= erosion {
                *l = 0;
            }
        }
    }
    let r = cc.boundary_noise_px as i64;
    if r > 0 {
        let before = labels.clone();
        let d = boundary_distance(&before, bh, bw);
        for (i, l) in labels.iter_mut().enumerate() {
            if d[i] as i64 > r || unit(rng) >= severity {
                continue;
            }
            let y = (i / bw) as i64 + rng.random_range(-r..=r);
            let x = (i % bw) as i64 + rng.random_range(-r..=r);
            *l = if y < 0 || x < 0 || y >= bh as i64 || x >= bw as i64 {
                0
            } else {
                before[y as usize * bw + x as usize]
            };
        }
    }

    let tensor = confidence_tensor(config, rng, &labels, &target, bh, bw)?;
    let mask = PredictedMask::new(
        format!("{}_p{:02}", gt.image_id(), human.owner()),
        bbox,
        tensor.derive_maps().0,
    )?;
    debug_assert_eq!(mask.labels.values(), &labels[..]);

    let overlaps = ImageOverlaps::compute(gt, std::slice::from_ref(human), std::slice::from_ref(&mask), n_cat)?;
    let true_miou = overlaps.similarity(0, 0);
    let part_iou: BTreeMap<usize, f64> = (1..n_cat)
        .filter_map(|c| overlaps.part_iou(0, 0, c).map(|v| (c, v)))
        .collect();
    let box_iou = bbox.iou(&gbox);

    let box_score = if config.gt_boxes {
        1.0
    } else {
        (box_iou + gaussian(rng, config.score_noise.box_sigma)).clamp(0.0, 1.0)
    };
    let iou_score = (true_miou + gaussian(rng, config.score_noise.iou_sigma)).clamp(0.0, 1.0);

    let rec = InstanceRecord::new(
        mask.instance_id.clone(),
        gt.image_id(),
        [bbox.x as i64, bbox.y as i64, bw as i64, bh as i64],
        (h_img, w_img),
        box_score,
        Some(iou_score),
        InstancePayload::from_tensor(tensor),
    )?;
    let truth = TruthEntry {
        instance_id: mask.instance_id,
        image_id: gt.image_id().to_owned(),
        gt_instance_id: human.instance_id().to_owned(),
        true_miou,
        box_iou,
        part_iou,
    };
    Ok((rec, truth))
}

fn confidence_tensor(
    config: &SynthConfig,
    rng: &mut ChaCha8Rng,
    labels: &[u8],
    target: &[u8],
    h: usize,
    w: usize,
) -> Result<ProbabilityTensor> {
    let cc = &config.corruption;
    let n_cat = config.categories;
    let plane = h * w;
    let min_conf = 1.0 / n_cat as f64 + 1e-3;
    let dist = boundary_distance(labels, h, w);
    let mut values = vec![0f32; n_cat * plane];
    let mut column = vec![0f64; n_cat];
    for i in 0..plane {
        let label = labels[i] as usize;
        let corrupted = labels[i] != target[i];
        let conf = if corrupted {
            uniform(rng, cc.corrupted_confidence.0, cc.corrupted_confidence.1)
        } else {
            let interior =
                1.0 - (1.0 - 1.0 / n_cat as f64) * (1.0 - unit(rng)).powf(cc.confidence_sharpness);
            let rise = if cc.boundary_decay_px > 0.0 {
                1.0 - (-((dist[i] - 1) as f64) / cc.boundary_decay_px).exp()
            } else {
                1.0
            };
            cc.confidence_floor + (interior - cc.confidence_floor) * rise
        }
        .clamp(min_conf, 1.0);

        // runner-up: the true label when wrong, otherwise a random other category
        let runner = if corrupted {
            target[i] as usize
        } else {
            let mut o = rng.random_range(0..n_cat - 1);
            if o >= label {
                o += 1;
            }
            o
        };
        let rest_n = (n_cat - 2) as f64;
        let cap = conf * (1.0 - 1e-3);
        let lo = (1.0 - conf - rest_n * cap).max(0.0);
        let second = (0.6 * (1.0 - conf)).clamp(lo, cap.max(lo));
        let each = if n_cat > 2 {
            (1.0 - conf - second) / rest_n
        } else {
            0.0
        };
        column.iter_mut().for_each(|v| *v = each);
        column[label] = conf;
        column[runner] = if n_cat > 2 { second } else { 1.0 - conf };
        for (c, v) in column.iter().enumerate() {
            values[c * plane + i] = *v as f32;
        }
    }
    ProbabilityTensor::new(n_cat, h, w, values)
}

/// Storage form for [`write_corpus`].
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
pub enum Storage {
    /// One `PQT1` tensor per instance.
    #[default]
    Tensor,
    /// An 8-bit label PNG plus a `PQM1` probability map per instance.
    Maps,
}

fn write_image(dir: &Path, im: &SynthImage, storage: Storage) -> Result<(ImageEntry, Vec<InstanceEntry>)> {
    let gt_rel = format!("gt/{}.png", im.gt.image_id());
    write_gt_canvas(&dir.join(&gt_rel), &im.gt)?;
    let mut entries = Vec::with_capacity(im.predictions.len());
    for rec in &im.predictions {
        let b = rec.bbox();
        let mut e = InstanceEntry {
            instance_id: rec.instance_id().to_owned(),
            image_id: rec.image_id().to_owned(),
            bbox: [b.x as i64, b.y as i64, b.width as i64, b.height as i64],
            box_score: rec.box_score(),
            iou_score: rec.iou_score(),
            probvals_path: None,
            labelmap_path: None,
            probmap_path: None,
        };
        match (storage, rec.payload()) {
            (Storage::Tensor, InstancePayload::Tensor { tensor, .. }) => {
                let rel = format!("pred/{}.pqt", rec.instance_id());
                write_tensor(&dir.join(&rel), tensor)?;
                e.probvals_path = Some(rel);
            }
            _ => {
                let (l_rel, p_rel) = (
                    format!("pred/{}.png", rec.instance_id()),
                    format!("pred/{}.pqm", rec.instance_id()),
                );
                write_label_map(&dir.join(&l_rel), rec.labels())?;
                write_prob_map(&dir.join(&p_rel), rec.probs())?;
                e.labelmap_path = Some(l_rel);
                e.probmap_path = Some(p_rel);
            }
        }
        entries.push(e);
    }
    let image = ImageEntry {
        image_id: im.gt.image_id().to_owned(),
        height: im.gt.height(),
        width: im.gt.width(),
        gt_path: Some(gt_rel),
    };
    Ok((image, entries))
}

fn prepare_dir(dir: &Path) -> Result<()> {
    for sub in ["gt", "pred"] {
        let p = dir.join(sub);
        std::fs::create_dir_all(&p).map_err(|e| Error::io(&p, e))?;
    }
    Ok(())
}

fn finish_dir(
    dir: &Path,
    categories: Vec<String>,
    per_image: Vec<(ImageEntry, Vec<InstanceEntry>)>,
    truth: &TruthSidecar,
) -> Result<PathBuf> {
    let mut manifest = Manifest {
        version: MANIFEST_VERSION,
        categories,
        images: Vec::new(),
        instances: Vec::new(),
    };
    for (im, inst) in per_image {
        manifest.images.push(im);
        manifest.instances.extend(inst);
    }
    let path = dir.join("manifest.json");
    save_manifest(&path, &manifest)?;
    truth.write(&dir.join("truth.json"))?;
    Ok(path)
}

/// Writes `corpus` under `dir` (manifest.json, truth.json, gt/, pred/) and returns
/// the manifest path.
pub fn write_corpus(corpus: &SynthCorpus, dir: &Path, storage: Storage) -> Result<PathBuf> {
    prepare_dir(dir)?;
    let per_image = par::try_map_range(corpus.images.len(), |i| {
        write_image(dir, &corpus.images[i], storage)
    })?;
    finish_dir(dir, corpus.categories.clone(), per_image, &corpus.truth)
}

/// Generates and writes a corpus one image at a time, never holding more than the
/// images in flight. Output is identical to `write_corpus(&generate(config)?, ..)`.
pub fn generate_to_dir(config: &SynthConfig, dir: &Path, storage: Storage) -> Result<PathBuf> {
    config.validate()?;
    prepare_dir(dir)?;
    let per_image = par::try_map_range(config.num_images, |i| {
        let (im, truth) = generate_image(config, i)?;
        Ok::<_, Error>((write_image(dir, &im, storage)?, truth))
    })?;
    let mut entries = Vec::with_capacity(per_image.len());
    let mut truth = TruthSidecar {
        version: RECORDS_VERSION,
        instances: Vec::new(),
    };
    for (e, t) in per_image {
        entries.push(e);
        truth.instances.extend(t);
    }
    finish_dir(dir, config.category_names(), entries, &truth)
}

/// Spearman rank correlation with average ranks for ties.
///
/// Returns 0 when either side is constant (no ranking information).
pub fn spearman(x: &[f64], y: &[f64]) -> Result<f64> {
    if x.len() != y.len() {
        return Err(Error::Dimension(format!("{} vs {} samples", x.len(), y.len())));
    }
    if x.len() < 3 {
        return Err(Error::InvalidInput(format!(
            "rank correlation needs at least 3 samples, got {}",
            x.len()
        )));
    }
    if x.iter().chain(y).any(|v| v.is_nan()) {
        return Err(Error::InvalidInput("NaN sample".into()));
    }
    let (rx, ry) = (average_ranks(x), average_ranks(y));
    let n = x.len() as f64;
    let (mx, my) = (rx.iter().sum::<f64>() / n, ry.iter().sum::<f64>() / n);
    let (mut sxy, mut sxx, mut syy) = (0.0, 0.0, 0.0);
    for (a, b) in rx.iter().zip(&ry) {
        sxy += (a - mx) * (b - my);
        sxx += (a - mx) * (a - mx);
        syy += (b - my) * (b - my);
    }
    if sxx == 0.0 || syy == 0.0 {
        return Ok(0.0);
    }
    Ok(sxy / (sxx * syy).sqrt())
}

fn average_ranks(v: &[f64]) -> Vec<f64> {
    let mut idx: Vec<usize> = (0..v.len()).collect();
    idx.sort_by(|&a, &b| v[a].total_cmp(&v[b]));
    let mut ranks = vec![0.0; v.len()];
    let mut i = 0;
    while i < idx.len() {
        let mut j = i;
        while j + 1 < idx.len() && v[idx[j + 1]] == v[idx[i]] {
            j += 1;
        }
        let r = (i + j) as f64 / 2.0 + 1.0;
        for &k in &idx[i..=j] {
            ranks[k] = r;
        }
        i = j + 1;
    }
    ranks
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CorrelationRow {
    pub score: String,
    pub rho: f64,
    pub samples: usize,
}

/// Rank correlation of each candidate score with true quality.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CorrelationReport {
    /// Against true instance mIoU.
    pub instance: Vec<CorrelationRow>,
    /// Against true part IoU, over (instance, predicted category) pairs.
    pub part: Vec<CorrelationRow>,
}

impl CorrelationReport {
    pub fn get(&self, score: &str) -> Option<f64> {
        self.instance
            .iter()
            .chain(&self.part)
            .find(|r| r.score == score)
            .map(|r| r.rho)
    }

    pub fn to_tsv(&self) -> String {
        let mut s = String::from("target\tscore\trho\tsamples\n");
        for (target, rows) in [("instance_miou", &self.instance), ("part_iou", &self.part)] {
            for r in rows {
                s.push_str(&format!("{target}\t{}\t{}\t{}\n", r.score, r.rho, r.samples));
            }
        }
        s
    }
}

/// Correlates box, IoU, pixel and fused scores (pixel scores at each of
/// `thresholds`) with the truth sidecar. Rows are named `box_score`, `iou_score`,
/// `pixel_score@T`, `quality_score@T`, `part_pixel_score@T`, `part_quality_score@T`.
pub fn correlation_report(
    records: &[InstanceRecord],
    truth: &TruthSidecar,
    categories: usize,
    thresholds: &[f64],
    weights: QualityWeights,
) -> Result<CorrelationReport> {
    let truth_by_id: BTreeMap<&str, &TruthEntry> = truth
        .instances
        .iter()
        .map(|t| (t.instance_id.as_str(), t))
        .collect();
    let mut paired: Vec<(&InstanceRecord, &TruthEntry)> = Vec::with_capacity(records.len());
    for r in records {
        let t = truth_by_id.get(r.instance_id()).ok_or_else(|| {
            Error::InvalidInput(format!("no truth entry for instance {}", r.instance_id()))
        })?;
        paired.push((r, t));
    }
    let true_miou: Vec<f64> = paired.iter().map(|(_, t)| t.true_miou).collect();
    let row = |name: String, xs: &[f64], ys: &[f64]| -> Result<CorrelationRow> {
        Ok(CorrelationRow {
            score: name,
            rho: spearman(xs, ys)?,
            samples: xs.len(),
        })
    };

    let mut instance = Vec::new();
    let mut part = Vec::new();
    let boxes: Vec<f64> = paired.iter().map(|(r, _)| r.box_score()).collect();
    instance.push(row("box_score".into(), &boxes, &true_miou)?);
    let ious: Vec<f64> = paired.iter().map(|(r, _)| r.iou_score().unwrap_or(0.0)).collect();
    instance.push(row("iou_score".into(), &ious, &true_miou)?);

    for &t in thresholds {
        let cfg = PixelScoreConfig::new(t)?;
        let scored = par::try_map_range(paired.len(), |k| {
            let (r, truth) = paired[k];
            let (ips, cps) = pixel_scores(r.labels(), r.probs(), categories, cfg)?;
            let s_i = r.iou_score().unwrap_or(1.0);
            let q = fuse(r.box_score(), s_i, ips, weights)?;
            let parts: Vec<(f64, f64, f64)> = cps
                .iter()
                .filter_map(|(c, s)| truth.part_iou.get(&c).map(|&iou| (s, iou)))
                .map(|(s, iou)| Ok((s, fuse(r.box_score(), s_i, s, weights)?, iou)))
                .collect::<Result<_>>()?;
            Ok::<_, Error>((ips, q, parts))
        })?;
        let ps: Vec<f64> = scored.iter().map(|s| s.0).collect();
        let qs: Vec<f64> = scored.iter().map(|s| s.1).collect();
        instance.push(row(format!("pixel_score@{t}"), &ps, &true_miou)?);
        instance.push(row(format!("quality_score@{t}"), &qs, &true_miou)?);
        let flat: Vec<&(f64, f64, f64)> = scored.iter().flat_map(|s| &s.2).collect();
        let part_truth: Vec<f64> = flat.iter().map(|p| p.2).collect();
        let part_ps: Vec<f64> = flat.iter().map(|p| p.0).collect();
        let part_qs: Vec<f64> = flat.iter().map(|p| p.1).collect();
        part.push(row(format!("part_pixel_score@{t}"), &part_ps, &part_truth)?);
        part.push(row(format!("part_quality_score@{t}"), &part_qs, &part_truth)?);
    }
    Ok(CorrelationReport { instance, part })
}
