//! Quality scoring and evaluation for multiple-human parsing.
//!
//! A parser emits, per detected human, a box, a box score and a probability tensor
//! over part categories. This crate turns those into instance and part quality
//! scores (a weighted geometric mean of box, IoU and pixel scores), evaluates scored
//! predictions against ground truth (pixel accuracy, mIoU, AP^p, PCP, AP^r), and
//! generates synthetic corpora with known true quality.
//!
//! Data-parallel loops run on rayon when the `parallel` feature (default) is on and
//! sequentially otherwise; results are identical either way.

pub mod error;
pub mod fusion;
pub mod io;
pub mod metrics;
pub mod par;
pub mod pixel_score;
pub mod synthetic;
pub mod types;

pub use error::{Error, Result};
pub use fusion::{
    default_grid, fuse, score_instance, sweep_weights, Objective, QualityScore, RawScores,
    ScoredCorpus, SweepRow,
};
pub use metrics::{evaluate, EvalImage, EvalReport, MatchThresholds};
pub use pixel_score::{
    category_pixel_scores, instance_pixel_score, pixel_scores, CategoryPixelScores,
    PixelScoreConfig,
};
pub use types::*;
