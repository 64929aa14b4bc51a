//! Corpus manifest (JSON, version 1).
//!
//! Paths inside the manifest are relative to the manifest's directory. Loading
//! validates the schema and that every referenced file exists; payloads are read
//! only when an instance or ground-truth image is requested.

use std::collections::{BTreeMap, HashSet};
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use super::binary::{read_prob_map, read_tensor};
use super::raster::{read_gt_canvas, read_label_map};
use super::{read_json, write_json};
use crate::error::{Error, Result};
use crate::types::{
    clip_box, ImageCanvas, InstancePayload, InstanceRecord, PredictedMask, MAX_CATEGORIES,
};

pub const MANIFEST_VERSION: u32 = 1;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Manifest {
    pub version: u32,
    /// Category names; index 0 is background.
    pub categories: Vec<String>,
    pub images: Vec<ImageEntry>,
    pub instances: Vec<InstanceEntry>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ImageEntry {
    pub image_id: String,
    pub height: usize,
    pub width: usize,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub gt_path: Option<String>,
}

/// One predicted human. Exactly one storage form is present: `probvals_path`
/// (full tensor) or `labelmap_path` + `probmap_path`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct InstanceEntry {
    pub instance_id: String,
    pub image_id: String,
    /// `[x, y, w, h]` in image pixels, before clipping.
    #[serde(rename = "box")]
    pub bbox: [i64; 4],
    pub box_score: f64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub iou_score: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub probvals_path: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub labelmap_path: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub probmap_path: Option<String>,
}

/// A validated manifest bound to its directory.
#[derive(Debug, Clone)]
pub struct Corpus {
    path: PathBuf,
    root: PathBuf,
    manifest: Manifest,
    /// instance indices per image, sorted by instance id
    by_image: Vec<Vec<usize>>,
    image_of_instance: Vec<usize>,
}

pub fn load_manifest(path: &Path) -> Result<Corpus> {
    let manifest: Manifest = read_json(path)?;
    Corpus::new(path, manifest)
}

pub fn save_manifest(path: &Path, manifest: &Manifest) -> Result<()> {
    write_json(path, manifest)
}

impl Corpus {
    /// Validates `manifest` as if it had been read from `path`.
    pub fn new(path: &Path, manifest: Manifest) -> Result<Self> {
        let root = path
            .parent()
            .map(Path::to_path_buf)
            .unwrap_or_else(|| PathBuf::from("."));
        let schema = |field: String, msg: String| Error::schema(path, field, msg);

        if manifest.version != MANIFEST_VERSION {
            return Err(schema(
                "version".into(),
                format!("unsupported version {} (expected {MANIFEST_VERSION})", manifest.version),
            ));
        }
        if !(2..=MAX_CATEGORIES).contains(&manifest.categories.len()) {
            return Err(schema(
                "categories".into(),
                format!("need 2..={MAX_CATEGORIES} categories, got {}", manifest.categories.len()),
            ));
        }

        let mut image_slot = BTreeMap::new();
        for (i, im) in manifest.images.iter().enumerate() {
            if image_slot.insert(im.image_id.as_str(), i).is_some() {
                return Err(schema(
                    format!("images[{i}].image_id"),
                    format!("duplicate image id {:?}", im.image_id),
                ));
            }
            if im.height == 0 || im.width == 0 {
                return Err(schema(format!("images[{i}]"), "image dims must be positive".into()));
            }
            if let Some(p) = &im.gt_path {
                check_file(&root, p, path, format!("images[{i}].gt_path"))?;
            }
        }

        let mut ids = HashSet::new();
        let mut by_image = vec![Vec::new(); manifest.images.len()];
        let mut image_of_instance = Vec::with_capacity(manifest.instances.len());
        for (k, inst) in manifest.instances.iter().enumerate() {
            let field = |f: &str| format!("instances[{k}].{f}");
            if !ids.insert(inst.instance_id.as_str()) {
                return Err(schema(
                    field("instance_id"),
                    format!("duplicate instance id {:?}", inst.instance_id),
                ));
            }
            let Some(&slot) = image_slot.get(inst.image_id.as_str()) else {
                return Err(schema(
                    field("image_id"),
                    format!("unknown image {:?}", inst.image_id),
                ));
            };
            by_image[slot].push(k);
            image_of_instance.push(slot);
            let im = &manifest.images[slot];
            clip_box(inst.bbox, im.height, im.width)
                .map_err(|e| schema(field("box"), e.to_string()))?;
            for (name, v) in [("box_score", Some(inst.box_score)), ("iou_score", inst.iou_score)] {
                if let Some(v) = v {
                    if v.is_nan() || !(0.0..=1.0).contains(&v) {
                        return Err(schema(field(name), format!("{v} outside [0, 1]")));
                    }
                }
            }
            match (&inst.probvals_path, &inst.labelmap_path, &inst.probmap_path) {
                (Some(t), None, None) => check_file(&root, t, path, field("probvals_path"))?,
                (None, Some(l), Some(p)) => {
                    check_file(&root, l, path, field("labelmap_path"))?;
                    check_file(&root, p, path, field("probmap_path"))?;
                }
                _ => {
                    return Err(schema(
                        field("probvals_path"),
                        "need either probvals_path alone or labelmap_path + probmap_path".into(),
                    ))
                }
            }
        }
        for list in &mut by_image {
            list.sort_by(|&a, &b| {
                manifest.instances[a]
                    .instance_id
                    .cmp(&manifest.instances[b].instance_id)
            });
        }

        Ok(Self {
            path: path.to_path_buf(),
            root,
            manifest,
            by_image,
            image_of_instance,
        })
    }

    pub fn path(&self) -> &Path {
        &self.path
    }

    pub fn root(&self) -> &Path {
        &self.root
    }

    pub fn manifest(&self) -> &Manifest {
        &self.manifest
    }

    pub fn categories(&self) -> &[String] {
        &self.manifest.categories
    }

    pub fn num_categories(&self) -> usize {
        self.manifest.categories.len()
    }

    /// Instance indices of image `slot`, in instance-id order.
    pub fn instances_of(&self, slot: usize) -> &[usize] {
        &self.by_image[slot]
    }

    /// Image slots in image-id order.
    pub fn image_order(&self) -> Vec<usize> {
        let mut order: Vec<usize> = (0..self.manifest.images.len()).collect();
        order.sort_by(|&a, &b| {
            self.manifest.images[a]
                .image_id
                .cmp(&self.manifest.images[b].image_id)
        });
        order
    }

    fn resolve(&self, rel: &str) -> PathBuf {
        self.root.join(rel)
    }

    fn image_of(&self, k: usize) -> &ImageEntry {
        &self.manifest.images[self.image_of_instance[k]]
    }

    /// Reads and validates instance `k`, clipping its box to the image.
    pub fn load_instance(&self, k: usize) -> Result<InstanceRecord> {
        let inst = &self.manifest.instances[k];
        let payload = match (&inst.probvals_path, &inst.labelmap_path, &inst.probmap_path) {
            (Some(t), _, _) => {
                let tensor = read_tensor(&self.resolve(t))?;
                if tensor.categories() != self.num_categories() {
                    return Err(Error::format(
                        self.resolve(t),
                        format!(
                            "tensor has {} categories, manifest declares {}",
                            tensor.categories(),
                            self.num_categories()
                        ),
                    ));
                }
                InstancePayload::from_tensor(tensor)
            }
            (None, Some(l), Some(p)) => {
                let labels = read_label_map(&self.resolve(l))?;
                labels
                    .check_categories(self.num_categories())
                    .map_err(|e| Error::format(self.resolve(l), e.to_string()))?;
                let probs = read_prob_map(&self.resolve(p))?;
                InstancePayload::from_maps(labels, probs)
                    .map_err(|e| Error::format(self.resolve(p), e.to_string()))?
            }
            _ => unreachable!("storage form validated on load"),
        };
        let im = self.image_of(k);
        InstanceRecord::new(
            inst.instance_id.clone(),
            inst.image_id.clone(),
            inst.bbox,
            (im.height, im.width),
            inst.box_score,
            inst.iou_score,
            payload,
        )
        .map_err(|e| Error::schema(&self.path, format!("instances[{k}]"), e.to_string()))
    }

    /// Reads only what evaluation needs: the clipped box and label map.
    pub fn load_mask(&self, k: usize) -> Result<PredictedMask> {
        let inst = &self.manifest.instances[k];
        let labels = match (&inst.probvals_path, &inst.labelmap_path) {
            (Some(t), _) => read_tensor(&self.resolve(t))?.derive_maps().0,
            (None, Some(l)) => read_label_map(&self.resolve(l))?,
            _ => unreachable!("storage form validated on load"),
        };
        let im = self.image_of(k);
        let err = |msg: String| Error::schema(&self.path, format!("instances[{k}]"), msg);
        if labels.height() as i64 != inst.bbox[3] || labels.width() as i64 != inst.bbox[2] {
            return Err(err(format!(
                "box is {}x{} (h x w) but label map is {}x{}",
                inst.bbox[3],
                inst.bbox[2],
                labels.height(),
                labels.width()
            )));
        }
        let clipped = clip_box(inst.bbox, im.height, im.width).map_err(|e| err(e.to_string()))?;
        let labels = labels
            .crop(
                clipped.offset_y,
                clipped.offset_x,
                clipped.bbox.height,
                clipped.bbox.width,
            )
            .map_err(|e| err(e.to_string()))?;
        PredictedMask::new(inst.instance_id.clone(), clipped.bbox, labels)
    }

    /// Ground-truth canvas of image `slot`; `None` if the manifest has no GT path.
    pub fn load_gt(&self, slot: usize) -> Result<Option<ImageCanvas>> {
        let im = &self.manifest.images[slot];
        let Some(rel) = &im.gt_path else {
            return Ok(None);
        };
        let path = self.resolve(rel);
        let canvas = read_gt_canvas(&path, &im.image_id)?;
        if canvas.height() != im.height || canvas.width() != im.width {
            return Err(Error::format(
                &path,
                format!(
                    "raster is {}x{}, manifest says {}x{}",
                    canvas.height(),
                    canvas.width(),
                    im.height,
                    im.width
                ),
            ));
        }
        Ok(Some(canvas))
    }
}

fn check_file(root: &Path, rel: &str, manifest: &Path, field: String) -> Result<()> {
    let full = root.join(rel);
    if full.is_file() {
        Ok(())
    } else {
        Err(Error::schema(
            manifest,
            field,
            format!("referenced file {} does not exist", full.display()),
        ))
    }
}
