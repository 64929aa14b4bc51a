mod support;

use parsing_quality::metrics::evaluate;
use parsing_quality::{pixel_scores, MatchThresholds, PixelScoreConfig};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use support::oracle;

#[test]
fn pixel_scores_match_per_pixel_loop() {
    let mut rng = ChaCha8Rng::seed_from_u64(11);
    for _ in 0..300 {
        let tensor = oracle::random_tensor(&mut rng, 12, 6);
        let (labels, probs) = tensor.derive_maps();
        for t in [0.0, 0.2, 0.5, 0.9] {
            let (inst, cats) =
                pixel_scores(&labels, &probs, tensor.categories(), PixelScoreConfig::new(t).unwrap())
                    .unwrap();
            let (o_inst, o_cats) = oracle::pixel_scores(
                tensor.categories(),
                tensor.height(),
                tensor.width(),
                tensor.values(),
                t,
            );
            assert_eq!(inst, o_inst);
            assert_eq!(cats.as_map(), &o_cats);
        }
    }
}

#[test]
fn metrics_match_brute_force_on_micro_corpora() {
    let mut rng = ChaCha8Rng::seed_from_u64(5);
    for thresholds in [MatchThresholds::mhp(), MatchThresholds::coco()] {
        for _ in 0..60 {
            let (images, cats) = oracle::random_micro_corpus(&mut rng);
            let names: Vec<String> = (0..cats).map(|c| format!("c{c}")).collect();
            let report = evaluate(&oracle::to_eval_images(&images), &names, &thresholds).unwrap();
            let o = oracle::evaluate(&images, cats, thresholds.values());
            assert_eq!(report.pix_acc, o.pix_acc);
            assert_eq!(report.mean_acc, o.mean_acc);
            assert_eq!(report.miou, o.miou);
            let per_class: Vec<Option<f64>> = report.per_class_iou.iter().map(|c| c.iou).collect();
            assert_eq!(per_class, o.per_class);
            let ap_p: Vec<f64> = thresholds
                .values()
                .iter()
                .map(|t| report.ap_p[&MatchThresholds::key(*t)])
                .collect();
            assert_eq!(ap_p, o.ap_p);
            assert_eq!(report.ap_p_mean, o.ap_p_mean);
            assert_eq!(report.ap_p_50, o.ap_p_50);
            assert_eq!(report.pcp_50, o.pcp_50);
            let ap_r: Vec<f64> = thresholds
                .values()
                .iter()
                .map(|t| report.ap_r[&MatchThresholds::key(*t)])
                .collect();
            assert_eq!(ap_r, o.ap_r);
            assert_eq!(report.ap_r_mean, o.ap_r_mean);
            assert_eq!(report.ap_r_50, o.ap_r_50);
        }
    }
}
