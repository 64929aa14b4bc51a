//! PNG rasters.
//!
//! Label maps are 8-bit grayscale: pixel value = category index. Ground-truth
//! images are 8-bit RGB: red = category, green = human number (0 = no human,
//! `k + 1` = human `k`), blue unused.

use std::path::Path;

use image::{DynamicImage, GrayImage, ImageFormat, RgbImage};

use crate::error::{Error, Result};
use crate::types::{ImageCanvas, LabelMap};

fn open(path: &Path) -> Result<DynamicImage> {
    let reader = image::ImageReader::open(path).map_err(|e| Error::io(path, e))?;
    let reader = reader
        .with_guessed_format()
        .map_err(|e| Error::io(path, e))?;
    reader
        .decode()
        .map_err(|e| Error::format(path, e.to_string()))
}

pub fn read_label_map(path: &Path) -> Result<LabelMap> {
    match open(path)? {
        DynamicImage::ImageLuma8(img) => {
            let (w, h) = img.dimensions();
            LabelMap::new(h as usize, w as usize, img.into_raw())
                .map_err(|e| Error::format(path, e.to_string()))
        }
        other => Err(Error::format(
            path,
            format!("label map must be 8-bit grayscale, found {:?}", other.color()),
        )),
    }
}

pub fn write_label_map(path: &Path, labels: &LabelMap) -> Result<()> {
    let img = GrayImage::from_raw(
        labels.width() as u32,
        labels.height() as u32,
        labels.values().to_vec(),
    )
    .expect("label buffer matches its dims");
    img.save_with_format(path, ImageFormat::Png)
        .map_err(|e| Error::format(path, e.to_string()))
}

pub fn read_gt_canvas(path: &Path, image_id: &str) -> Result<ImageCanvas> {
    let img = match open(path)? {
        DynamicImage::ImageRgb8(img) => img,
        other => {
            return Err(Error::format(
                path,
                format!("ground truth must be 8-bit RGB, found {:?}", other.color()),
            ))
        }
    };
    let (w, h) = img.dimensions();
    let mut semantic = Vec::with_capacity((w * h) as usize);
    let mut owners = Vec::with_capacity((w * h) as usize);
    for px in img.pixels() {
        semantic.push(px[0]);
        owners.push(px[1] as i32 - 1);
    }
    ImageCanvas::new(image_id, h as usize, w as usize, semantic, owners)
        .map_err(|e| Error::format(path, e.to_string()))
}

pub fn write_gt_canvas(path: &Path, canvas: &ImageCanvas) -> Result<()> {
    if canvas.owner_count() > 255 {
        return Err(Error::format(path, "more than 255 humans in one image"));
    }
    let mut raw = Vec::with_capacity(canvas.semantic().len() * 3);
    for (&s, &k) in canvas.semantic().iter().zip(canvas.instance_index()) {
        raw.extend_from_slice(&[s, (k + 1) as u8, 0]);
    }
    let img = RgbImage::from_raw(canvas.width() as u32, canvas.height() as u32, raw)
        .expect("canvas buffer matches its dims");
    img.save_with_format(path, ImageFormat::Png)
        .map_err(|e| Error::format(path, e.to_string()))
}
