//! Domain types shared by scoring, evaluation, I/O and the synthetic harness.
//!
//! All types are immutable once constructed. Constructors validate the invariants
//! listed on each type, so downstream code never re-checks them.

use std::fmt;
use std::str::FromStr;
use std::sync::OnceLock;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Per-pixel column sums may deviate from 1.0 by at most this much.
///
/// Large enough for tensors that went through 32-bit serialization.
pub const NORMALIZATION_TOLERANCE: f64 = 1e-4;

/// Category index reserved for background / "not this person".
pub const BACKGROUND: usize = 0;

/// Largest category count representable in an 8-bit label raster.
pub const MAX_CATEGORIES: usize = 256;

/// Class-probability volume for one instance, stored category-major then row-major.
#[derive(Debug, Clone, PartialEq)]
pub struct ProbabilityTensor {
    categories: usize,
    height: usize,
    width: usize,
    values: Vec<f32>,
}

impl ProbabilityTensor {
    /// Validates shape, finiteness, range and per-pixel normalization.
    pub fn new(categories: usize, height: usize, width: usize, values: Vec<f32>) -> Result<Self> {
        if !(2..=MAX_CATEGORIES).contains(&categories) {
            return Err(Error::InvalidInput(format!(
                "category count {categories} outside 2..={MAX_CATEGORIES}"
            )));
        }
        if height == 0 || width == 0 {
            return Err(Error::InvalidInput(format!(
                "tensor spatial dims must be positive, got {height}x{width}"
            )));
        }
        let plane = height * width;
        if values.len() != categories * plane {
            return Err(Error::Dimension(format!(
                "expected {} values for {categories}x{height}x{width}, got {}",
                categories * plane,
                values.len()
            )));
        }
        if let Some(i) = values
            .iter()
            .position(|v| !v.is_finite() || *v < 0.0 || *v > 1.0)
        {
            return Err(Error::InvalidInput(format!(
                "tensor value {} at flat index {i} is not a probability",
                values[i]
            )));
        }
        for p in 0..plane {
            let sum: f64 = (0..categories).map(|c| values[c * plane + p] as f64).sum();
            if (sum - 1.0).abs() > NORMALIZATION_TOLERANCE {
                return Err(Error::InvalidInput(format!(
                    "pixel ({}, {}) sums to {sum}, not 1",
                    p / width,
                    p % width
                )));
            }
        }
        Ok(Self {
            categories,
            height,
            width,
            values,
        })
    }

    pub fn categories(&self) -> usize {
        self.categories
    }

    pub fn height(&self) -> usize {
        self.height
    }

    pub fn width(&self) -> usize {
        self.width
    }

    pub fn values(&self) -> &[f32] {
        &self.values
    }

    pub fn get(&self, category: usize, y: usize, x: usize) -> f32 {
        self.values[(category * self.height + y) * self.width + x]
    }

    /// Per-pixel argmax (ties to the lowest category) and maximum.
    pub fn derive_maps(&self) -> (LabelMap, ProbabilityMap) {
        let plane = self.height * self.width;
        let mut labels = vec![0u8; plane];
        let mut probs = self.values[..plane].to_vec();
        for c in 1..self.categories {
            let row = &self.values[c * plane..(c + 1) * plane];
            for ((best, label), &v) in probs.iter_mut().zip(labels.iter_mut()).zip(row) {
                // strict comparison keeps the earliest category on ties
                if v > *best {
                    *best = v;
                    *label = c as u8;
                }
            }
        }
        (
            LabelMap {
                height: self.height,
                width: self.width,
                values: labels,
            },
            ProbabilityMap {
                height: self.height,
                width: self.width,
                values: probs,
            },
        )
    }

    /// Sub-window `[y0, y0 + h) x [x0, x0 + w)`.
    pub fn crop(&self, y0: usize, x0: usize, h: usize, w: usize) -> Result<Self> {
        check_window(self.height, self.width, y0, x0, h, w)?;
        let mut values = Vec::with_capacity(self.categories * h * w);
        for c in 0..self.categories {
            for y in y0..y0 + h {
                let start = (c * self.height + y) * self.width + x0;
                values.extend_from_slice(&self.values[start..start + w]);
            }
        }
        Ok(Self {
            categories: self.categories,
            height: h,
            width: w,
            values,
        })
    }
}

fn check_window(height: usize, width: usize, y0: usize, x0: usize, h: usize, w: usize) -> Result<()> {
    if h == 0 || w == 0 || y0 + h > height || x0 + w > width {
        return Err(Error::Dimension(format!(
            "window {h}x{w}@({y0},{x0}) does not fit in {height}x{width}"
        )));
    }
    Ok(())
}

/// Per-pixel maximum class probability.
#[derive(Debug, Clone, PartialEq)]
pub struct ProbabilityMap {
    height: usize,
    width: usize,
    values: Vec<f32>,
}

impl ProbabilityMap {
    pub fn new(height: usize, width: usize, values: Vec<f32>) -> Result<Self> {
        if height == 0 || width == 0 {
            return Err(Error::InvalidInput(format!(
                "probability map dims must be positive, got {height}x{width}"
            )));
        }
        if values.len() != height * width {
            return Err(Error::Dimension(format!(
                "expected {} values for {height}x{width}, got {}",
                height * width,
                values.len()
            )));
        }
        if let Some(v) = values
            .iter()
            .find(|v| !v.is_finite() || **v < 0.0 || **v > 1.0)
        {
            return Err(Error::InvalidInput(format!(
                "probability map value {v} outside [0, 1]"
            )));
        }
        Ok(Self {
            height,
            width,
            values,
        })
    }

    pub fn height(&self) -> usize {
        self.height
    }

    pub fn width(&self) -> usize {
        self.width
    }

    pub fn values(&self) -> &[f32] {
        &self.values
    }

    pub fn get(&self, y: usize, x: usize) -> f32 {
        self.values[y * self.width + x]
    }

    pub fn crop(&self, y0: usize, x0: usize, h: usize, w: usize) -> Result<Self> {
        check_window(self.height, self.width, y0, x0, h, w)?;
        let values = (y0..y0 + h)
            .flat_map(|y| self.values[y * self.width + x0..y * self.width + x0 + w].iter().copied())
            .collect();
        Ok(Self {
            height: h,
            width: w,
            values,
        })
    }
}

/// Per-pixel category index.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct LabelMap {
    height: usize,
    width: usize,
    values: Vec<u8>,
}

impl LabelMap {
    pub fn new(height: usize, width: usize, values: Vec<u8>) -> Result<Self> {
        if height == 0 || width == 0 {
            return Err(Error::InvalidInput(format!(
                "label map dims must be positive, got {height}x{width}"
            )));
        }
        if values.len() != height * width {
            return Err(Error::Dimension(format!(
                "expected {} labels for {height}x{width}, got {}",
                height * width,
                values.len()
            )));
        }
        Ok(Self {
            height,
            width,
            values,
        })
    }

    pub fn height(&self) -> usize {
        self.height
    }

    pub fn width(&self) -> usize {
        self.width
    }

    pub fn values(&self) -> &[u8] {
        &self.values
    }

    pub fn get(&self, y: usize, x: usize) -> usize {
        self.values[y * self.width + x] as usize
    }

    /// Largest label present, or 0 for an all-background map.
    pub fn max_label(&self) -> usize {
        self.values.iter().copied().max().unwrap_or(0) as usize
    }

    /// Errors if any label is `>= categories`.
    pub fn check_categories(&self, categories: usize) -> Result<()> {
        match self.max_label() {
            m if m < categories => Ok(()),
            m => Err(Error::InvalidInput(format!(
                "label {m} out of range for {categories} categories"
            ))),
        }
    }

    pub fn crop(&self, y0: usize, x0: usize, h: usize, w: usize) -> Result<Self> {
        check_window(self.height, self.width, y0, x0, h, w)?;
        let values = (y0..y0 + h)
            .flat_map(|y| self.values[y * self.width + x0..y * self.width + x0 + w].iter().copied())
            .collect();
        Ok(Self {
            height: h,
            width: w,
            values,
        })
    }
}

/// Pixels whose probability reaches the threshold, optionally restricted to one category.
#[derive(Debug, Clone, PartialEq)]
pub struct HighConfidenceMask {
    height: usize,
    width: usize,
    bits: Vec<bool>,
    threshold: f64,
}

impl HighConfidenceMask {
    /// Instance-wide mask: `p >= threshold` over every pixel.
    pub fn instance(probs: &ProbabilityMap, threshold: f64) -> Self {
        Self {
            height: probs.height,
            width: probs.width,
            bits: probs.values.iter().map(|&v| v as f64 >= threshold).collect(),
            threshold,
        }
    }

    /// Category mask: labelled `category` and `p >= threshold`.
    pub fn category(
        labels: &LabelMap,
        probs: &ProbabilityMap,
        category: usize,
        threshold: f64,
    ) -> Result<Self> {
        same_dims(labels, probs)?;
        Ok(Self {
            height: probs.height,
            width: probs.width,
            bits: labels
                .values
                .iter()
                .zip(&probs.values)
                .map(|(&l, &v)| l as usize == category && v as f64 >= threshold)
                .collect(),
            threshold,
        })
    }

    pub fn height(&self) -> usize {
        self.height
    }

    pub fn width(&self) -> usize {
        self.width
    }

    pub fn bits(&self) -> &[bool] {
        &self.bits
    }

    pub fn threshold(&self) -> f64 {
        self.threshold
    }

    pub fn count(&self) -> usize {
        self.bits.iter().filter(|b| **b).count()
    }
}

pub(crate) fn same_dims(labels: &LabelMap, probs: &ProbabilityMap) -> Result<()> {
    if labels.height != probs.height || labels.width != probs.width {
        return Err(Error::Dimension(format!(
            "label map {}x{} vs probability map {}x{}",
            labels.height, labels.width, probs.height, probs.width
        )));
    }
    Ok(())
}

/// Axis-aligned box in image pixels, always inside its image.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct PixelBox {
    pub x: usize,
    pub y: usize,
    pub width: usize,
    pub height: usize,
}

impl PixelBox {
    pub fn area(&self) -> usize {
        self.width * self.height
    }

    pub fn right(&self) -> usize {
        self.x + self.width
    }

    pub fn bottom(&self) -> usize {
        self.y + self.height
    }

    pub fn iou(&self, other: &PixelBox) -> f64 {
        let ix = self.right().min(other.right()).saturating_sub(self.x.max(other.x));
        let iy = self.bottom().min(other.bottom()).saturating_sub(self.y.max(other.y));
        let inter = ix * iy;
        let union = self.area() + other.area() - inter;
        if union == 0 {
            0.0
        } else {
            inter as f64 / union as f64
        }
    }
}

/// A raw `(x, y, w, h)` box clipped to an image, with the offset of the kept
/// window inside the original box.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct ClippedBox {
    pub bbox: PixelBox,
    pub offset_x: usize,
    pub offset_y: usize,
}

/// Clips a raw box to `[0, image_width) x [0, image_height)`.
pub fn clip_box(raw: [i64; 4], image_height: usize, image_width: usize) -> Result<ClippedBox> {
    let [x, y, w, h] = raw;
    if w <= 0 || h <= 0 {
        return Err(Error::InvalidInput(format!(
            "box {raw:?} must have positive width and height"
        )));
    }
    let x0 = x.max(0);
    let y0 = y.max(0);
    let x1 = (x + w).min(image_width as i64);
    let y1 = (y + h).min(image_height as i64);
    if x1 <= x0 || y1 <= y0 {
        return Err(Error::InvalidInput(format!(
            "box {raw:?} lies outside the {image_height}x{image_width} image"
        )));
    }
    Ok(ClippedBox {
        bbox: PixelBox {
            x: x0 as usize,
            y: y0 as usize,
            width: (x1 - x0) as usize,
            height: (y1 - y0) as usize,
        },
        offset_x: (x0 - x) as usize,
        offset_y: (y0 - y) as usize,
    })
}

/// Stored per-instance parsing output.
#[derive(Debug)]
pub enum InstancePayload {
    /// Full tensor; the label/probability pair is derived on first use.
    Tensor {
        tensor: ProbabilityTensor,
        derived: OnceLock<(LabelMap, ProbabilityMap)>,
    },
    /// Pre-argmaxed pair, as kept by pipelines that drop full tensors.
    Maps {
        labels: LabelMap,
        probs: ProbabilityMap,
    },
}

impl InstancePayload {
    pub fn from_tensor(tensor: ProbabilityTensor) -> Self {
        InstancePayload::Tensor {
            tensor,
            derived: OnceLock::new(),
        }
    }

    pub fn from_maps(labels: LabelMap, probs: ProbabilityMap) -> Result<Self> {
        same_dims(&labels, &probs)?;
        Ok(InstancePayload::Maps { labels, probs })
    }

    fn dims(&self) -> (usize, usize) {
        match self {
            InstancePayload::Tensor { tensor, .. } => (tensor.height, tensor.width),
            InstancePayload::Maps { labels, .. } => (labels.height, labels.width),
        }
    }

    fn crop(self, y0: usize, x0: usize, h: usize, w: usize) -> Result<Self> {
        Ok(match self {
            InstancePayload::Tensor { tensor, .. } => {
                InstancePayload::from_tensor(tensor.crop(y0, x0, h, w)?)
            }
            InstancePayload::Maps { labels, probs } => InstancePayload::Maps {
                labels: labels.crop(y0, x0, h, w)?,
                probs: probs.crop(y0, x0, h, w)?,
            },
        })
    }

    /// Label and probability maps, deriving (once) from the tensor if needed.
    pub fn maps(&self) -> (&LabelMap, &ProbabilityMap) {
        match self {
            InstancePayload::Tensor { tensor, derived } => {
                let (l, p) = derived.get_or_init(|| tensor.derive_maps());
                (l, p)
            }
            InstancePayload::Maps { labels, probs } => (labels, probs),
        }
    }
}

impl Clone for InstancePayload {
    fn clone(&self) -> Self {
        match self {
            InstancePayload::Tensor { tensor, derived } => InstancePayload::Tensor {
                tensor: tensor.clone(),
                derived: derived.clone(),
            },
            InstancePayload::Maps { labels, probs } => InstancePayload::Maps {
                labels: labels.clone(),
                probs: probs.clone(),
            },
        }
    }
}

/// One detected human with its detector/IoU scores and parsing output.
#[derive(Debug, Clone)]
pub struct InstanceRecord {
    instance_id: String,
    image_id: String,
    bbox: PixelBox,
    box_score: f64,
    iou_score: Option<f64>,
    payload: InstancePayload,
}

impl InstanceRecord {
    /// Builds a record, clipping `raw_box` to the image and cropping the payload
    /// to match. The payload must be sized like the unclipped box.
    pub fn new(
        instance_id: impl Into<String>,
        image_id: impl Into<String>,
        raw_box: [i64; 4],
        image_dims: (usize, usize),
        box_score: f64,
        iou_score: Option<f64>,
        payload: InstancePayload,
    ) -> Result<Self> {
        let instance_id = instance_id.into();
        check_unit("box_score", box_score)?;
        if let Some(s) = iou_score {
            check_unit("iou_score", s)?;
        }
        let (ph, pw) = payload.dims();
        if ph as i64 != raw_box[3] || pw as i64 != raw_box[2] {
            return Err(Error::Dimension(format!(
                "instance {instance_id}: box {}x{} (h x w) but payload is {ph}x{pw}",
                raw_box[3], raw_box[2]
            )));
        }
        let clipped = clip_box(raw_box, image_dims.0, image_dims.1)?;
        let payload = if clipped.bbox.width == pw && clipped.bbox.height == ph {
            payload
        } else {
            payload.crop(
                clipped.offset_y,
                clipped.offset_x,
                clipped.bbox.height,
                clipped.bbox.width,
            )?
        };
        Ok(Self {
            instance_id,
            image_id: image_id.into(),
            bbox: clipped.bbox,
            box_score,
            iou_score,
            payload,
        })
    }

    pub fn instance_id(&self) -> &str {
        &self.instance_id
    }

    pub fn image_id(&self) -> &str {
        &self.image_id
    }

    pub fn bbox(&self) -> PixelBox {
        self.bbox
    }

    pub fn box_score(&self) -> f64 {
        self.box_score
    }

    pub fn iou_score(&self) -> Option<f64> {
        self.iou_score
    }

    pub fn payload(&self) -> &InstancePayload {
        &self.payload
    }

    pub fn labels(&self) -> &LabelMap {
        self.payload.maps().0
    }

    pub fn probs(&self) -> &ProbabilityMap {
        self.payload.maps().1
    }

    /// The label map positioned in image space.
    pub fn mask(&self) -> PredictedMask {
        PredictedMask {
            instance_id: self.instance_id.clone(),
            bbox: self.bbox,
            labels: self.labels().clone(),
        }
    }

    /// Same record with the box score replaced (e.g. the ground-truth box regime).
    pub fn with_box_score(mut self, box_score: f64) -> Result<Self> {
        check_unit("box_score", box_score)?;
        self.box_score = box_score;
        Ok(self)
    }
}

pub(crate) fn check_unit(name: &str, v: f64) -> Result<()> {
    if v.is_nan() || !(0.0..=1.0).contains(&v) {
        return Err(Error::InvalidInput(format!("{name} = {v} outside [0, 1]")));
    }
    Ok(())
}

/// A predicted label map placed at its box in image space.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct PredictedMask {
    pub instance_id: String,
    pub bbox: PixelBox,
    pub labels: LabelMap,
}

impl PredictedMask {
    pub fn new(instance_id: impl Into<String>, bbox: PixelBox, labels: LabelMap) -> Result<Self> {
        let instance_id = instance_id.into();
        if labels.height != bbox.height || labels.width != bbox.width {
            return Err(Error::Dimension(format!(
                "instance {instance_id}: box {}x{} but label map {}x{}",
                bbox.height, bbox.width, labels.height, labels.width
            )));
        }
        Ok(Self {
            instance_id,
            bbox,
            labels,
        })
    }
}

/// Exponents `(alpha, beta, gamma)` applied to box, IoU and pixel scores.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "[f64; 3]", into = "[f64; 3]")]
pub struct QualityWeights {
    alpha: f64,
    beta: f64,
    gamma: f64,
}

impl QualityWeights {
    pub fn new(alpha: f64, beta: f64, gamma: f64) -> Result<Self> {
        for (name, w) in [("alpha", alpha), ("beta", beta), ("gamma", gamma)] {
            if !w.is_finite() || w < 0.0 {
                return Err(Error::InvalidInput(format!(
                    "weight {name} = {w} must be finite and >= 0"
                )));
            }
        }
        if alpha + beta + gamma <= 0.0 {
            return Err(Error::InvalidInput(
                "at least one quality weight must be positive".into(),
            ));
        }
        Ok(Self { alpha, beta, gamma })
    }

    pub fn alpha(&self) -> f64 {
        self.alpha
    }

    pub fn beta(&self) -> f64 {
        self.beta
    }

    pub fn gamma(&self) -> f64 {
        self.gamma
    }

    pub fn as_array(&self) -> [f64; 3] {
        [self.alpha, self.beta, self.gamma]
    }

    /// Multiplies every weight by `k > 0`.
    pub fn scaled(&self, k: f64) -> Result<Self> {
        Self::new(self.alpha * k, self.beta * k, self.gamma * k)
    }
}

impl Default for QualityWeights {
    fn default() -> Self {
        Self {
            alpha: 1.0,
            beta: 1.0,
            gamma: 1.0,
        }
    }
}

impl TryFrom<[f64; 3]> for QualityWeights {
    type Error = Error;

    fn try_from([a, b, g]: [f64; 3]) -> Result<Self> {
        Self::new(a, b, g)
    }
}

impl From<QualityWeights> for [f64; 3] {
    fn from(w: QualityWeights) -> Self {
        w.as_array()
    }
}

impl FromStr for QualityWeights {
    type Err = Error;

    /// Parses `"a,b,c"`.
    fn from_str(s: &str) -> Result<Self> {
        let parts: Vec<&str> = s.split(',').map(str::trim).collect();
        if parts.len() != 3 {
            return Err(Error::InvalidInput(format!(
                "weights must be three comma-separated numbers, got {s:?}"
            )));
        }
        let mut w = [0.0; 3];
        for (slot, p) in w.iter_mut().zip(&parts) {
            *slot = p
                .parse()
                .map_err(|_| Error::InvalidInput(format!("bad weight {p:?} in {s:?}")))?;
        }
        Self::try_from(w)
    }
}

impl fmt::Display for QualityWeights {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{},{},{}", self.alpha, self.beta, self.gamma)
    }
}

/// Image-level semantic and instance ownership maps.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ImageCanvas {
    image_id: String,
    height: usize,
    width: usize,
    semantic: Vec<u8>,
    instance_index: Vec<i32>,
}

impl ImageCanvas {
    /// `instance_index` uses −1 for unowned pixels, which must be background.
    pub fn new(
        image_id: impl Into<String>,
        height: usize,
        width: usize,
        semantic: Vec<u8>,
        instance_index: Vec<i32>,
    ) -> Result<Self> {
        let image_id = image_id.into();
        let n = height * width;
        if n == 0 || semantic.len() != n || instance_index.len() != n {
            return Err(Error::Dimension(format!(
                "canvas {image_id}: {height}x{width} with {} semantic / {} instance values",
                semantic.len(),
                instance_index.len()
            )));
        }
        if let Some(i) = semantic
            .iter()
            .zip(&instance_index)
            .position(|(&s, &k)| k < 0 && s != 0)
        {
            return Err(Error::InvalidInput(format!(
                "canvas {image_id}: pixel ({}, {}) has category {} but no instance",
                i / width,
                i % width,
                semantic[i]
            )));
        }
        Ok(Self {
            image_id,
            height,
            width,
            semantic,
            instance_index,
        })
    }

    /// Empty canvas: all background, no owners.
    pub fn blank(image_id: impl Into<String>, height: usize, width: usize) -> Result<Self> {
        Self::new(
            image_id,
            height,
            width,
            vec![0; height * width],
            vec![-1; height * width],
        )
    }

    pub fn image_id(&self) -> &str {
        &self.image_id
    }

    pub fn height(&self) -> usize {
        self.height
    }

    pub fn width(&self) -> usize {
        self.width
    }

    pub fn semantic(&self) -> &[u8] {
        &self.semantic
    }

    pub fn instance_index(&self) -> &[i32] {
        &self.instance_index
    }

    /// Number of distinct owners (`max index + 1`).
    pub fn owner_count(&self) -> usize {
        self.instance_index
            .iter()
            .copied()
            .max()
            .map_or(0, |m| (m + 1).max(0) as usize)
    }

    /// Splits the canvas into ground-truth humans, one per owner index that has at
    /// least one non-background pixel. Ids are `"{image_id}#{index}"`.
    pub fn ground_truth_instances(&self) -> Vec<GroundTruthInstance> {
        let n = self.owner_count();
        let mut bounds = vec![(usize::MAX, usize::MAX, 0usize, 0usize); n];
        for (i, (&k, &s)) in self.instance_index.iter().zip(&self.semantic).enumerate() {
            if k < 0 || s == 0 {
                continue;
            }
            let (y, x) = (i / self.width, i % self.width);
            let b = &mut bounds[k as usize];
            b.0 = b.0.min(y);
            b.1 = b.1.min(x);
            b.2 = b.2.max(y + 1);
            b.3 = b.3.max(x + 1);
        }
        bounds
            .iter()
            .enumerate()
            .filter(|(_, b)| b.0 != usize::MAX)
            .map(|(k, &(y0, x0, y1, x1))| {
                let (h, w) = (y1 - y0, x1 - x0);
                let mut values = Vec::with_capacity(h * w);
                for y in y0..y1 {
                    for x in x0..x1 {
                        let i = y * self.width + x;
                        values.push(if self.instance_index[i] == k as i32 {
                            self.semantic[i]
                        } else {
                            0
                        });
                    }
                }
                GroundTruthInstance {
                    instance_id: format!("{}#{k}", self.image_id),
                    image_id: self.image_id.clone(),
                    owner: k,
                    bbox: PixelBox {
                        x: x0,
                        y: y0,
                        width: w,
                        height: h,
                    },
                    labels: LabelMap {
                        height: h,
                        width: w,
                        values,
                    },
                }
            })
            .collect()
    }
}

/// A ground-truth human cropped to its tight box.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct GroundTruthInstance {
    instance_id: String,
    image_id: String,
    owner: usize,
    bbox: PixelBox,
    labels: LabelMap,
}

impl GroundTruthInstance {
    pub fn instance_id(&self) -> &str {
        &self.instance_id
    }

    pub fn image_id(&self) -> &str {
        &self.image_id
    }

    /// Owner index in the source canvas.
    pub fn owner(&self) -> usize {
        self.owner
    }

    pub fn bbox(&self) -> PixelBox {
        self.bbox
    }

    pub fn labels(&self) -> &LabelMap {
        &self.labels
    }
}
