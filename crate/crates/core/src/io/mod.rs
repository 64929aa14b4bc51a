//! On-disk formats: binary probability tensors and maps, 8-bit label rasters,
//! RGB ground-truth rasters, and the JSON manifest / scores / truth files.

mod batch;
mod binary;
mod manifest;
mod raster;
mod records;

use std::path::Path;

use serde::de::DeserializeOwned;
use serde::Serialize;

pub use batch::{evaluate_corpus, prepare_sweep, score_corpus};
pub use binary::{
    decode_prob_map, decode_tensor, encode_prob_map, encode_tensor, read_prob_map, read_tensor,
    write_prob_map, write_tensor, PROB_MAP_MAGIC, TENSOR_MAGIC,
};
pub use manifest::{load_manifest, save_manifest, Corpus, ImageEntry, InstanceEntry, Manifest, MANIFEST_VERSION};
pub use raster::{read_gt_canvas, read_label_map, write_gt_canvas, write_label_map};
pub use records::{ScoreEntry, ScoresFile, TruthEntry, TruthSidecar, RECORDS_VERSION};

use crate::error::{Error, Result};

/// Writes `value` as pretty JSON with a trailing newline.
pub fn write_json<T: Serialize>(path: &Path, value: &T) -> Result<()> {
    let mut text = serde_json::to_string_pretty(value)
        .map_err(|e| Error::format(path, format!("cannot serialize: {e}")))?;
    text.push('\n');
    std::fs::write(path, text).map_err(|e| Error::io(path, e))
}

pub fn read_json<T: DeserializeOwned>(path: &Path) -> Result<T> {
    let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    serde_json::from_str(&text).map_err(|e| Error::format(path, e.to_string()))
}
