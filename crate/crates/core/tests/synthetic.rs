use std::collections::BTreeMap;

use parsing_quality::io::{evaluate_corpus, load_manifest, score_corpus};
use parsing_quality::metrics::{evaluate, EvalImage};
use parsing_quality::synthetic::{
    correlation_report, generate, generate_to_dir, spearman, write_corpus, Storage, SynthConfig,
};
use parsing_quality::{
    score_instance, MatchThresholds, PixelScoreConfig, QualityWeights, NORMALIZATION_TOLERANCE,
};
use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

fn small(cfg: SynthConfig) -> SynthConfig {
    SynthConfig {
        height: 64,
        width: 80,
        humans_per_image: (1, 3),
        ..cfg
    }
}

#[test]
fn clean_corpus_passes_through() {
    let corpus = generate(&small(SynthConfig::clean(4, 12))).unwrap();
    let mut images = Vec::new();
    for im in &corpus.images {
        let mut scores = Vec::new();
        for rec in &im.predictions {
            let (ips, cps) = parsing_quality::pixel_scores(
                rec.labels(),
                rec.probs(),
                corpus.categories.len(),
                PixelScoreConfig::default(),
            )
            .unwrap();
            let q = score_instance(rec, &cps, ips, QualityWeights::default()).unwrap();
            assert!(q.instance_score >= 0.99, "{}", q.instance_score);
            assert!(q.part_scores.values().all(|&v| v >= 0.99));
            scores.push(q);
        }
        images.push(EvalImage {
            gt: im.gt.clone(),
            preds: im.predictions.iter().map(|r| r.mask()).collect(),
            scores,
        });
    }
    let r = evaluate(&images, &corpus.categories, &MatchThresholds::mhp()).unwrap();
    assert_eq!((r.miou, r.pix_acc, r.ap_p_mean, r.pcp_50, r.ap_r_mean), (1.0, 1.0, 1.0, 1.0, 1.0));
    assert!(corpus.truth.instances.iter().all(|t| t.true_miou == 1.0 && t.box_iou == 1.0));
}

#[test]
fn generation_is_deterministic_and_thread_independent() {
    let cfg = small(SynthConfig::mixed(17, 8));
    let a = tempfile::tempdir().unwrap();
    let b = tempfile::tempdir().unwrap();
    parsing_quality::par::with_jobs(Some(1), || generate_to_dir(&cfg, a.path(), Storage::Tensor)).unwrap();
    let corpus = parsing_quality::par::with_jobs(Some(3), || generate(&cfg)).unwrap();
    write_corpus(&corpus, b.path(), Storage::Tensor).unwrap();
    let list = |d: &std::path::Path| {
        let mut v: Vec<_> = walk(d).into_iter().map(|p| p.strip_prefix(d).unwrap().to_owned()).collect();
        v.sort();
        v
    };
    let (la, lb) = (list(a.path()), list(b.path()));
    assert_eq!(la, lb);
    for rel in la {
        assert_eq!(
            std::fs::read(a.path().join(&rel)).unwrap(),
            std::fs::read(b.path().join(&rel)).unwrap(),
            "{}",
            rel.display()
        );
    }
    let other = generate(&SynthConfig { seed: 18, ..cfg }).unwrap();
    assert_ne!(other.truth, corpus.truth);
}

fn walk(d: &std::path::Path) -> Vec<std::path::PathBuf> {
    let mut out = Vec::new();
    for e in std::fs::read_dir(d).unwrap() {
        let p = e.unwrap().path();
        if p.is_dir() {
            out.extend(walk(&p));
        } else {
            out.push(p);
        }
    }
    out
}

#[test]
fn emitted_tensors_satisfy_invariants() {
    let corpus = generate(&small(SynthConfig::mixed(3, 10))).unwrap();
    for rec in corpus.records() {
        let parsing_quality::InstancePayload::Tensor { tensor, .. } = rec.payload() else {
            panic!("synthetic predictions carry tensors");
        };
        let (c, plane) = (tensor.categories(), tensor.height() * tensor.width());
        for i in 0..plane {
            let col: Vec<f32> = (0..c).map(|k| tensor.values()[k * plane + i]).collect();
            let sum: f64 = col.iter().map(|&v| v as f64).sum();
            assert!((sum - 1.0).abs() <= NORMALIZATION_TOLERANCE);
            let label = rec.labels().values()[i] as usize;
            assert!(col.iter().enumerate().all(|(k, &v)| k == label || v < col[label]));
            assert!(col[label] as f64 > 1.0 / c as f64);
        }
    }
}

/// Recomputes part IoUs from the emitted masks and the GT canvas, pixel by pixel.
#[test]
fn truth_sidecar_matches_recomputed_ious() {
    let cfg = SynthConfig {
        height: 128,
        width: 128,
        humans_per_image: (1, 2),
        categories: 4,
        corruption: parsing_quality::synthetic::CorruptionConfig {
            erosion_px: (2, 2),
            confidence_floor: 0.3,
            corrupted_confidence: (0.3, 0.6),
            ..SynthConfig::mixed(0, 0).corruption
        },
        ..SynthConfig::mixed(8, 12)
    };
    let corpus = generate(&cfg).unwrap();
    let truth: BTreeMap<&str, _> = corpus
        .truth
        .instances
        .iter()
        .map(|t| (t.instance_id.as_str(), t))
        .collect();
    for im in &corpus.images {
        let (w, gt) = (im.gt.width(), &im.gt);
        for rec in &im.predictions {
            let t = truth[rec.instance_id()];
            let owner: i32 = t.gt_instance_id.rsplit('#').next().unwrap().parse().unwrap();
            let b = rec.bbox();
            let mut ious = BTreeMap::new();
            for c in 1..cfg.categories as u8 {
                let (mut inter, mut pa, mut ga) = (0u64, 0u64, 0u64);
                for y in 0..gt.height() {
                    for x in 0..w {
                        let inside = y >= b.y && y < b.bottom() && x >= b.x && x < b.right();
                        let pl = inside && rec.labels().values()[(y - b.y) * b.width + (x - b.x)] == c;
                        let gl = gt.instance_index()[y * w + x] == owner && gt.semantic()[y * w + x] == c;
                        pa += pl as u64;
                        ga += gl as u64;
                        inter += (pl && gl) as u64;
                    }
                }
                if pa + ga > 0 {
                    ious.insert(c as usize, inter as f64 / (pa + ga - inter) as f64);
                }
            }
            assert_eq!(ious, t.part_iou);
            let mean = ious.values().sum::<f64>() / ious.len() as f64;
            assert!((mean - t.true_miou).abs() < 1e-12);
        }
    }
}

#[test]
fn more_corruption_lowers_true_quality() {
    let mean_miou = |cfg: &SynthConfig| {
        let c = generate(cfg).unwrap();
        c.truth.instances.iter().map(|t| t.true_miou).sum::<f64>() / c.truth.instances.len() as f64
    };
    for seed in 0..3 {
        let clean = small(SynthConfig::clean(seed, 20));
        let boundary = small(SynthConfig::boundary_noise(seed, 20));
        let mixed = small(SynthConfig::mixed(seed, 20));
        let mut heavy = mixed.clone();
        heavy.corruption.boundary_noise_px = 4;
        heavy.corruption.part_swap_prob = 0.4;
        heavy.corruption.erosion_px = (1, 3);
        let q = [&clean, &boundary, &mixed, &heavy].map(mean_miou);
        assert!(q[0] - q[1] > 0.02 && q[1] - q[2] > 0.02 && q[2] - q[3] > 0.02, "{q:?}");
    }
}

#[test]
fn rank_correlation_properties() {
    let x: Vec<f64> = (0..500).map(|i| (i as f64 * 0.37).sin()).collect();
    assert!((spearman(&x, &x).unwrap() - 1.0).abs() < 1e-12);
    let mut rng = ChaCha8Rng::seed_from_u64(1);
    let mut shuffled = x.clone();
    shuffled.shuffle(&mut rng);
    assert!(spearman(&x, &shuffled).unwrap().abs() < 0.15);
    assert!(spearman(&x[..2], &x[..2]).is_err());
}

#[test]
fn correlation_report_rows() {
    let corpus = generate(&small(SynthConfig::boundary_noise(2, 20))).unwrap();
    let recs: Vec<_> = corpus.records().cloned().collect();
    let r = correlation_report(&recs, &corpus.truth, corpus.categories.len(), &[0.0, 0.2], QualityWeights::default())
        .unwrap();
    for name in ["box_score", "iou_score", "pixel_score@0", "pixel_score@0.2", "quality_score@0.2"] {
        assert!(r.get(name).is_some(), "{name}");
    }
    assert!(r.get("part_pixel_score@0.2").is_some());
    assert!(r.to_tsv().starts_with("target\tscore\trho\tsamples\n"));
    assert!(correlation_report(&recs[..2], &corpus.truth, corpus.categories.len(), &[0.2], QualityWeights::default())
        .is_err());
}

#[test]
fn on_disk_pipeline_matches_in_memory() {
    let corpus = generate(&small(SynthConfig::mixed(5, 6))).unwrap();
    for storage in [Storage::Tensor, Storage::Maps] {
        let dir = tempfile::tempdir().unwrap();
        let path = write_corpus(&corpus, dir.path(), storage).unwrap();
        let loaded = load_manifest(&path).unwrap();
        let scores = score_corpus(&loaded, PixelScoreConfig::default(), QualityWeights::default()).unwrap();
        let disk = evaluate_corpus(&loaded, &scores, &MatchThresholds::mhp()).unwrap();

        let by_id = scores.by_instance();
        let images: Vec<EvalImage> = corpus
            .images
            .iter()
            .map(|im| EvalImage {
                gt: im.gt.clone(),
                preds: im.predictions.iter().map(|r| r.mask()).collect(),
                scores: im
                    .predictions
                    .iter()
                    .map(|r| {
                        let e = by_id[r.instance_id()];
                        parsing_quality::QualityScore {
                            instance_score: e.instance_score,
                            part_scores: e.part_scores.clone(),
                        }
                    })
                    .collect(),
            })
            .collect();
        let mem = evaluate(&images, &corpus.categories, &MatchThresholds::mhp()).unwrap();
        assert_eq!(disk, mem);
    }
}

#[test]
fn impossible_layouts_fail() {
    let cfg = SynthConfig {
        width: 30,
        humans_per_image: (2, 8),
        ..SynthConfig::default()
    };
    assert!(matches!(generate(&cfg), Err(parsing_quality::Error::Generation(_))));
    let bad = SynthConfig {
        humans_per_image: (3, 2),
        ..SynthConfig::default()
    };
    assert!(generate(&bad).is_err());
}
