//! Pixel scores: mean confidence over the high-confidence mask of a parsing output.
//!
//! The instance score averages the probability map over every pixel whose value
//! reaches the threshold. Category scores do the same restricted to the pixels
//! predicted as one category. Background is never scored as a category.
//!
//! An empty high-confidence mask scores 0.0 rather than dividing by zero.

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::types::{same_dims, LabelMap, ProbabilityMap};

/// Threshold used to build the high-confidence mask.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PixelScoreConfig {
    threshold: f64,
}

impl PixelScoreConfig {
    pub const DEFAULT_THRESHOLD: f64 = 0.2;

    pub fn new(threshold: f64) -> Result<Self> {
        if threshold.is_finite() && (0.0..1.0).contains(&threshold) {
            Ok(Self { threshold })
        } else {
            Err(Error::InvalidInput(format!(
                "pixel-score threshold {threshold} outside [0, 1)"
            )))
        }
    }

    pub fn threshold(&self) -> f64 {
        self.threshold
    }
}

impl Default for PixelScoreConfig {
    fn default() -> Self {
        Self {
            threshold: Self::DEFAULT_THRESHOLD,
        }
    }
}

/// Per-category pixel scores for the categories an instance actually predicts.
///
/// Categories with no predicted pixels have no entry. Callers that want every
/// foreground category filled can use [`CategoryPixelScores::padded`].
#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
pub struct CategoryPixelScores {
    num_categories: usize,
    scores: BTreeMap<usize, f64>,
}

impl CategoryPixelScores {
    pub fn num_categories(&self) -> usize {
        self.num_categories
    }

    /// Score for `category`, `None` if it was not predicted.
    pub fn get(&self, category: usize) -> Option<f64> {
        self.scores.get(&category).copied()
    }

    /// Categories with at least one predicted pixel, ascending.
    pub fn present(&self) -> impl Iterator<Item = usize> + '_ {
        self.scores.keys().copied()
    }

    pub fn is_present(&self, category: usize) -> bool {
        self.scores.contains_key(&category)
    }

    pub fn iter(&self) -> impl Iterator<Item = (usize, f64)> + '_ {
        self.scores.iter().map(|(&c, &s)| (c, s))
    }

    pub fn as_map(&self) -> &BTreeMap<usize, f64> {
        &self.scores
    }

    /// Dense scores for categories `1..C`, with `absent` for unpredicted ones.
    pub fn padded(&self, absent: f64) -> Vec<f64> {
        (1..self.num_categories)
            .map(|c| self.get(c).unwrap_or(absent))
            .collect()
    }
}

/// Mean of `probs` over pixels `>= threshold`; 0.0 when none qualify.
pub fn instance_pixel_score(probs: &ProbabilityMap, config: PixelScoreConfig) -> f64 {
    let t = config.threshold;
    let (sum, count) = probs
        .values()
        .iter()
        .map(|&v| v as f64)
        .filter(|&v| v >= t)
        .fold((0.0f64, 0usize), |(s, n), v| (s + v, n + 1));
    if count == 0 {
        0.0
    } else {
        sum / count as f64
    }
}

/// Per-category mean confidence over pixels labelled `c` with probability `>= threshold`.
pub fn category_pixel_scores(
    labels: &LabelMap,
    probs: &ProbabilityMap,
    num_categories: usize,
    config: PixelScoreConfig,
) -> Result<CategoryPixelScores> {
    Ok(pixel_scores(labels, probs, num_categories, config)?.1)
}

/// Instance and category scores in a single pass over the pixels.
pub fn pixel_scores(
    labels: &LabelMap,
    probs: &ProbabilityMap,
    num_categories: usize,
    config: PixelScoreConfig,
) -> Result<(f64, CategoryPixelScores)> {
    same_dims(labels, probs)?;
    if num_categories < 2 {
        return Err(Error::InvalidInput(format!(
            "need at least 2 categories, got {num_categories}"
        )));
    }
    labels.check_categories(num_categories)?;

    let t = config.threshold;
    let mut pixels = vec![0usize; num_categories];
    let mut hc_sum = vec![0.0f64; num_categories];
    let mut hc_count = vec![0usize; num_categories];
    let mut inst_sum = 0.0f64;
    let mut inst_count = 0usize;
    for (&l, &v) in labels.values().iter().zip(probs.values()) {
        let l = l as usize;
        let v = v as f64;
        pixels[l] += 1;
        if v >= t {
            inst_sum += v;
            inst_count += 1;
            hc_sum[l] += v;
            hc_count[l] += 1;
        }
    }

    let instance = if inst_count == 0 {
        0.0
    } else {
        inst_sum / inst_count as f64
    };
    let scores = (1..num_categories)
        .filter(|&c| pixels[c] > 0)
        .map(|c| {
            let s = if hc_count[c] == 0 {
                0.0
            } else {
                hc_sum[c] / hc_count[c] as f64
            };
            (c, s)
        })
        .collect();
    Ok((
        instance,
        CategoryPixelScores {
            num_categories,
            scores,
        },
    ))
}
