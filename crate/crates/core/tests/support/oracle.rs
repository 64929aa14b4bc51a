//! Brute-force reference implementations, written from the metric definitions
//! without the library's precomputed overlaps. Everything is recomputed per pixel.
#![allow(dead_code)]

use std::collections::BTreeMap;

use parsing_quality::metrics::EvalImage;
use parsing_quality::{
    ImageCanvas, LabelMap, PixelBox, PredictedMask, ProbabilityTensor, QualityScore,
};
use rand::Rng;
use rand_chacha::ChaCha8Rng;

#[derive(Debug, Clone)]
pub struct OPred {
    pub id: String,
    pub x: usize,
    pub y: usize,
    pub w: usize,
    pub h: usize,
    pub labels: Vec<u8>,
    pub score: f64,
    pub part_scores: BTreeMap<usize, f64>,
}

impl OPred {
    /// Label at image pixel (y, x), or None outside the box.
    fn label_at(&self, y: usize, x: usize) -> Option<u8> {
        (y >= self.y && y < self.y + self.h && x >= self.x && x < self.x + self.w)
            .then(|| self.labels[(y - self.y) * self.w + (x - self.x)])
    }
}

#[derive(Debug, Clone)]
pub struct OImage {
    pub id: String,
    pub h: usize,
    pub w: usize,
    pub sem: Vec<u8>,
    pub owner: Vec<i32>,
    pub preds: Vec<OPred>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct OResult {
    pub pix_acc: f64,
    pub mean_acc: f64,
    pub miou: f64,
    pub per_class: Vec<Option<f64>>,
    pub ap_p: Vec<f64>,
    pub ap_p_mean: f64,
    pub ap_p_50: f64,
    pub pcp_50: f64,
    pub ap_r: Vec<f64>,
    pub ap_r_mean: f64,
    pub ap_r_50: f64,
}

/// Per-pixel loop: argmax (first maximum wins), then means over the pixels whose
/// maximum reaches `t`, overall and per labelled foreground category.
pub fn pixel_scores(
    c: usize,
    h: usize,
    w: usize,
    values: &[f32],
    t: f64,
) -> (f64, BTreeMap<usize, f64>) {
    let mut all = (0.0f64, 0usize);
    let mut per: BTreeMap<usize, (f64, usize)> = BTreeMap::new();
    for y in 0..h {
        for x in 0..w {
            let mut best = 0usize;
            for k in 1..c {
                if values[k * h * w + y * w + x] > values[best * h * w + y * w + x] {
                    best = k;
                }
            }
            let p = values[best * h * w + y * w + x] as f64;
            if best != 0 {
                per.entry(best).or_insert((0.0, 0));
            }
            if p >= t {
                all.0 += p;
                all.1 += 1;
                if best != 0 {
                    let e = per.get_mut(&best).unwrap();
                    e.0 += p;
                    e.1 += 1;
                }
            }
        }
    }
    let mean = |(s, n): (f64, usize)| if n == 0 { 0.0 } else { s / n as f64 };
    (mean(all), per.into_iter().map(|(k, v)| (k, mean(v))).collect())
}

fn mean(v: &[f64]) -> f64 {
    let mut s = 0.0;
    for x in v {
        s += x;
    }
    s / v.len() as f64
}

/// Humans of an image: owners with at least one labelled pixel, ascending.
pub fn humans(im: &OImage) -> Vec<i32> {
    let mut hs: Vec<i32> = im
        .owner
        .iter()
        .zip(&im.sem)
        .filter(|(&k, &s)| k >= 0 && s > 0)
        .map(|(&k, _)| k)
        .collect();
    hs.sort_unstable();
    hs.dedup();
    hs
}

/// (inter, pred area, gt area) of category `c` between prediction and human.
pub fn region_counts(im: &OImage, p: &OPred, owner: i32, c: u8) -> (u64, u64, u64) {
    let (mut i, mut pa, mut ga) = (0, 0, 0);
    for y in 0..im.h {
        for x in 0..im.w {
            let pl = p.label_at(y, x) == Some(c);
            let gl = im.owner[y * im.w + x] == owner && im.sem[y * im.w + x] == c;
            pa += pl as u64;
            ga += gl as u64;
            i += (pl && gl) as u64;
        }
    }
    (i, pa, ga)
}

pub fn iou(c: (u64, u64, u64)) -> Option<f64> {
    let union = c.1 + c.2 - c.0;
    (union > 0).then(|| c.0 as f64 / union as f64)
}

pub fn similarity(im: &OImage, p: &OPred, owner: i32, cats: usize) -> f64 {
    let v: Vec<f64> = (1..cats)
        .filter_map(|c| iou(region_counts(im, p, owner, c as u8)))
        .collect();
    if v.is_empty() {
        0.0
    } else {
        mean(&v)
    }
}

fn ap(tp: &[bool], npos: usize) -> f64 {
    if npos == 0 {
        return 0.0;
    }
    let mut total = 0.0;
    let mut hits = 0usize;
    let prec: Vec<f64> = tp
        .iter()
        .enumerate()
        .map(|(k, &t)| {
            hits += t as usize;
            hits as f64 / (k + 1) as f64
        })
        .collect();
    for k in 0..tp.len() {
        if tp[k] {
            // best precision at this rank or any later one
            let best = prec[k..].iter().cloned().fold(f64::NEG_INFINITY, f64::max);
            total += best;
        }
    }
    total / npos as f64
}

/// Greedy matching of (image, candidate, score) in rank order; `sim(image,
/// candidate, human position)`. Returns per-ranked-detection matched position.
fn greedy(
    dets: &[(usize, usize, f64)],
    images: &[OImage],
    gts: &[Vec<usize>],
    t: f64,
    sim: &dyn Fn(usize, usize, usize) -> f64,
) -> Vec<Option<usize>> {
    let mut used: Vec<Vec<bool>> = gts.iter().map(|g| vec![false; g.len()]).collect();
    let _ = images;
    dets.iter()
        .map(|&(i, p, _)| {
            let mut best: Option<(usize, f64)> = None;
            for (pos, &g) in gts[i].iter().enumerate() {
                if used[i][pos] {
                    continue;
                }
                let s = sim(i, p, g);
                match best {
                    Some((_, b)) if s <= b => {}
                    _ => best = Some((pos, s)),
                }
            }
            match best {
                Some((pos, s)) if s >= t => {
                    used[i][pos] = true;
                    Some(gts[i][pos])
                }
                _ => None,
            }
        })
        .collect()
}

fn ranked(images: &[OImage], mut dets: Vec<(usize, usize, f64)>) -> Vec<(usize, usize, f64)> {
    dets.sort_by(|a, b| {
        b.2.partial_cmp(&a.2)
            .unwrap()
            .then(images[a.0].preds[a.1].id.cmp(&images[b.0].preds[b.1].id))
            .then(images[a.0].id.cmp(&images[b.0].id))
    });
    dets
}

pub fn evaluate(images: &[OImage], cats: usize, thresholds: &[f64]) -> OResult {
    // semantic: paste, highest instance score wins, ties to the smaller id
    let mut conf = vec![vec![0u64; cats]; cats];
    for im in images {
        for y in 0..im.h {
            for x in 0..im.w {
                let mut win: Option<(&OPred, u8)> = None;
                for p in &im.preds {
                    let Some(l) = p.label_at(y, x) else { continue };
                    if l == 0 {
                        continue;
                    }
                    let better = match win {
                        None => true,
                        Some((q, _)) => p.score > q.score || (p.score == q.score && p.id < q.id),
                    };
                    if better {
                        win = Some((p, l));
                    }
                }
                let pred = win.map_or(0, |(_, l)| l) as usize;
                conf[im.sem[y * im.w + x] as usize][pred] += 1;
            }
        }
    }
    let total: u64 = conf.iter().flatten().sum();
    let trace: u64 = (0..cats).map(|k| conf[k][k]).sum();
    let mut recalls = Vec::new();
    let mut per_class = Vec::new();
    for k in 0..cats {
        let g: u64 = conf[k].iter().sum();
        let p: u64 = (0..cats).map(|j| conf[j][k]).sum();
        if g > 0 {
            recalls.push(conf[k][k] as f64 / g as f64);
        }
        let union = g + p - conf[k][k];
        per_class.push((union > 0).then(|| conf[k][k] as f64 / union as f64));
    }
    let ious: Vec<f64> = per_class.iter().flatten().copied().collect();

    let mut ts = thresholds.to_vec();
    if !ts.contains(&0.5) {
        ts.push(0.5);
    }
    let k50 = ts.iter().position(|&t| t == 0.5).unwrap();

    // part AP over humans
    let gts: Vec<Vec<usize>> = images.iter().map(|im| (0..humans(im).len()).collect()).collect();
    let owners: Vec<Vec<i32>> = images.iter().map(humans).collect();
    let npos: usize = gts.iter().map(Vec::len).sum();
    let dets = ranked(
        images,
        images
            .iter()
            .enumerate()
            .flat_map(|(i, im)| im.preds.iter().enumerate().map(move |(p, q)| (i, p, q.score)))
            .collect(),
    );
    let sim = |i: usize, p: usize, g: usize| {
        similarity(&images[i], &images[i].preds[p], owners[i][g], cats)
    };
    let part_matches: Vec<Vec<Option<usize>>> =
        ts.iter().map(|&t| greedy(&dets, images, &gts, t, &sim)).collect();
    let part_ap: Vec<f64> = part_matches
        .iter()
        .map(|m| ap(&m.iter().map(Option::is_some).collect::<Vec<_>>(), npos))
        .collect();
    let mut pcp_total = 0.0;
    for (i, im) in images.iter().enumerate() {
        for g in 0..owners[i].len() {
            let matched = dets
                .iter()
                .zip(&part_matches[k50])
                .find(|(d, m)| d.0 == i && **m == Some(g))
                .map(|(d, _)| d.1);
            let v = match matched {
                None => 0.0,
                Some(p) => {
                    let present: Vec<u8> = (1..cats as u8)
                        .filter(|&c| region_counts(im, &im.preds[p], owners[i][g], c).2 > 0)
                        .collect();
                    let good = present
                        .iter()
                        .filter(|&&c| {
                            iou(region_counts(im, &im.preds[p], owners[i][g], c)).unwrap() > 0.5
                        })
                        .count();
                    good as f64 / present.len() as f64
                }
            };
            pcp_total += v;
        }
    }
    let nt = thresholds.len();
    let (ap_p, ap_p_50, pcp_50) = if npos == 0 {
        (vec![0.0; nt], 0.0, 0.0)
    } else {
        (part_ap[..nt].to_vec(), part_ap[k50], pcp_total / npos as f64)
    };

    // region AP per category
    let mut per_cat: Vec<Vec<f64>> = Vec::new();
    for c in 1..cats as u8 {
        let gts: Vec<Vec<usize>> = images
            .iter()
            .enumerate()
            .map(|(i, im)| {
                (0..owners[i].len())
                    .filter(|&g| {
                        (0..im.h * im.w).any(|px| im.owner[px] == owners[i][g] && im.sem[px] == c)
                    })
                    .collect()
            })
            .collect();
        let npos: usize = gts.iter().map(Vec::len).sum();
        if npos == 0 {
            continue;
        }
        let dets = ranked(
            images,
            images
                .iter()
                .enumerate()
                .flat_map(|(i, im)| {
                    im.preds
                        .iter()
                        .enumerate()
                        .filter(move |(_, q)| q.labels.contains(&c))
                        .map(move |(p, q)| (i, p, q.part_scores[&(c as usize)]))
                })
                .collect(),
        );
        let sim = |i: usize, p: usize, g: usize| {
            iou(region_counts(&images[i], &images[i].preds[p], owners[i][g], c)).unwrap_or(0.0)
        };
        per_cat.push(
            ts.iter()
                .map(|&t| {
                    let m = greedy(&dets, images, &gts, t, &sim);
                    ap(&m.iter().map(Option::is_some).collect::<Vec<_>>(), npos)
                })
                .collect(),
        );
    }
    let at = |k: usize| {
        if per_cat.is_empty() {
            0.0
        } else {
            mean(&per_cat.iter().map(|v| v[k]).collect::<Vec<_>>())
        }
    };
    let ap_r: Vec<f64> = (0..nt).map(at).collect();

    OResult {
        pix_acc: trace as f64 / total as f64,
        mean_acc: mean(&recalls),
        miou: mean(&ious),
        per_class,
        ap_p_mean: mean(&ap_p),
        ap_p,
        ap_p_50,
        pcp_50,
        ap_r_mean: mean(&ap_r),
        ap_r_50: at(k50),
        ap_r,
    }
}

/// A small random corpus with overlapping humans, overlapping predictions and
/// heavily tied scores.
pub fn random_micro_corpus(rng: &mut ChaCha8Rng) -> (Vec<OImage>, usize) {
    let cats = rng.random_range(2..=4usize);
    let n_img = rng.random_range(1..=3);
    let levels = [0.2, 0.5, 0.5, 0.8, 1.0];
    let images = (0..n_img)
        .map(|i| {
            let (h, w) = (rng.random_range(4..=16), rng.random_range(4..=16));
            let mut sem = vec![0u8; h * w];
            let mut owner = vec![-1i32; h * w];
            for k in 0..rng.random_range(0..=3) {
                let (y0, x0) = (rng.random_range(0..h), rng.random_range(0..w));
                let (y1, x1) = (rng.random_range(y0 + 1..=h), rng.random_range(x0 + 1..=w));
                for y in y0..y1 {
                    for x in x0..x1 {
                        if rng.random_bool(0.85) {
                            sem[y * w + x] = rng.random_range(1..cats) as u8;
                            owner[y * w + x] = k;
                        }
                    }
                }
            }
            let preds = (0..rng.random_range(0..=3))
                .map(|p| {
                    let (y, x) = (rng.random_range(0..h), rng.random_range(0..w));
                    let (bh, bw) = (rng.random_range(1..=h - y), rng.random_range(1..=w - x));
                    let mut labels = Vec::with_capacity(bh * bw);
                    for yy in y..y + bh {
                        for xx in x..x + bw {
                            labels.push(if rng.random_bool(0.7) {
                                sem[yy * w + xx]
                            } else {
                                rng.random_range(0..cats) as u8
                            });
                        }
                    }
                    let mut part_scores = BTreeMap::new();
                    for c in 1..cats {
                        if labels.contains(&(c as u8)) {
                            part_scores.insert(c, levels[rng.random_range(0..levels.len())]);
                        }
                    }
                    // ids deliberately not in insertion order
                    OPred {
                        id: format!("i{}p{}", (n_img - i), 9 - p),
                        x,
                        y,
                        w: bw,
                        h: bh,
                        labels,
                        score: levels[rng.random_range(0..levels.len())],
                        part_scores,
                    }
                })
                .collect();
            OImage {
                id: format!("img{i}"),
                h,
                w,
                sem,
                owner,
                preds,
            }
        })
        .collect();
    (images, cats)
}

pub fn to_eval_images(images: &[OImage]) -> Vec<EvalImage> {
    images
        .iter()
        .map(|im| EvalImage {
            gt: ImageCanvas::new(im.id.clone(), im.h, im.w, im.sem.clone(), im.owner.clone())
                .unwrap(),
            preds: im
                .preds
                .iter()
                .map(|p| {
                    PredictedMask::new(
                        p.id.clone(),
                        PixelBox {
                            x: p.x,
                            y: p.y,
                            width: p.w,
                            height: p.h,
                        },
                        LabelMap::new(p.h, p.w, p.labels.clone()).unwrap(),
                    )
                    .unwrap()
                })
                .collect(),
            scores: im
                .preds
                .iter()
                .map(|p| QualityScore {
                    instance_score: p.score,
                    part_scores: p.part_scores.clone(),
                })
                .collect(),
        })
        .collect()
}

/// Random normalized tensor: a random label per pixel with confidence drawn from
/// a few levels (including exact threshold values) and the rest spread evenly.
pub fn random_tensor(rng: &mut ChaCha8Rng, max_hw: usize, max_c: usize) -> ProbabilityTensor {
    let c = rng.random_range(2..=max_c);
    let (h, w) = (rng.random_range(1..=max_hw), rng.random_range(1..=max_hw));
    let plane = h * w;
    let mut values = vec![0f32; c * plane];
    for i in 0..plane {
        let label = rng.random_range(0..c);
        let floor = 1.0 / c as f64;
        let conf = match rng.random_range(0..4) {
            0 => 0.2f64.max(floor + 1e-3),
            1 => 1.0,
            _ => floor + 1e-3 + (1.0 - floor - 1e-3) * rng.random::<f64>(),
        };
        let rest = if c > 1 { (1.0 - conf) / (c - 1) as f64 } else { 0.0 };
        for k in 0..c {
            values[k * plane + i] = if k == label { conf } else { rest } as f32;
        }
    }
    ProbabilityTensor::new(c, h, w, values).unwrap()
}
