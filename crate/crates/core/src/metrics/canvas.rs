use crate::error::{Error, Result};
use crate::types::{ImageCanvas, PredictedMask};

/// Pastes instance label maps into an image-space canvas.
///
/// A pixel is claimed by every instance whose (non-background) label covers it;
/// the claimant with the highest score owns it, ties going to the
/// lexicographically smaller instance id. `instance_index` refers to positions in
/// `preds`.
pub fn paste_instances(
    image_id: &str,
    height: usize,
    width: usize,
    preds: &[PredictedMask],
    scores: &[f64],
) -> Result<ImageCanvas> {
    if preds.len() != scores.len() {
        return Err(Error::Dimension(format!(
            "{} instances but {} scores",
            preds.len(),
            scores.len()
        )));
    }
    let mut semantic = vec![0u8; height * width];
    let mut owner = vec![-1i32; height * width];

    // paint lowest priority first so the winner is painted last
    let mut order: Vec<usize> = (0..preds.len()).collect();
    order.sort_by(|&a, &b| {
        scores[a]
            .total_cmp(&scores[b])
            .then_with(|| preds[b].instance_id.cmp(&preds[a].instance_id))
    });
    for k in order {
        let p = &preds[k];
        let b = p.bbox;
        if b.right() > width || b.bottom() > height {
            return Err(Error::Dimension(format!(
                "instance {}: box {:?} exceeds {height}x{width} image",
                p.instance_id, b
            )));
        }
        if p.labels.height() != b.height || p.labels.width() != b.width {
            return Err(Error::Dimension(format!(
                "instance {}: box {}x{} but label map {}x{}",
                p.instance_id,
                b.height,
                b.width,
                p.labels.height(),
                p.labels.width()
            )));
        }
        let labels = p.labels.values();
        for dy in 0..b.height {
            let row = &labels[dy * b.width..(dy + 1) * b.width];
            let base = (b.y + dy) * width + b.x;
            for (dx, &l) in row.iter().enumerate() {
                if l != 0 {
                    semantic[base + dx] = l;
                    owner[base + dx] = k as i32;
                }
            }
        }
    }
    ImageCanvas::new(image_id, height, width, semantic, owner)
}
