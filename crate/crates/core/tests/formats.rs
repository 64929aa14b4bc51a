mod support;

use std::path::Path;

use parsing_quality::io::{
    decode_prob_map, decode_tensor, encode_prob_map, encode_tensor, load_manifest, read_gt_canvas,
    read_label_map, save_manifest, write_gt_canvas, write_label_map, ImageEntry, InstanceEntry,
    Manifest, ScoresFile, MANIFEST_VERSION,
};
use parsing_quality::{Error, ImageCanvas, LabelMap, ProbabilityTensor};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use support::oracle;

#[test]
fn tensors_round_trip_bit_exactly() {
    let mut rng = ChaCha8Rng::seed_from_u64(7);
    let here = Path::new("mem");
    for _ in 0..100 {
        let t = oracle::random_tensor(&mut rng, 24, 9);
        let bytes = encode_tensor(&t);
        assert_eq!(bytes.len(), 16 + 4 * t.values().len());
        let back = decode_tensor(&bytes, here).unwrap();
        assert_eq!(back, t);
        assert_eq!(encode_tensor(&back), bytes);

        let (_, p) = t.derive_maps();
        let pb = encode_prob_map(&p);
        assert_eq!(decode_prob_map(&pb, here).unwrap(), p);
    }
}

#[test]
fn corrupt_tensor_files_are_rejected() {
    let t = ProbabilityTensor::new(2, 1, 2, vec![0.75, 0.5, 0.25, 0.5]).unwrap();
    let good = encode_tensor(&t);
    let here = Path::new("x.pqt");

    let mut bad_magic = good.clone();
    bad_magic[0] = b'X';
    assert!(matches!(decode_tensor(&bad_magic, here), Err(Error::Format { .. })));
    assert!(matches!(decode_tensor(&good[..good.len() - 1], here), Err(Error::Format { .. })));
    let mut trailing = good.clone();
    trailing.push(0);
    assert!(matches!(decode_tensor(&trailing, here), Err(Error::Format { .. })));
    // columns that don't sum to one
    let mut unnormalized = good.clone();
    unnormalized[16..20].copy_from_slice(&0.9f32.to_le_bytes());
    assert!(matches!(decode_tensor(&unnormalized, here), Err(Error::Format { .. })));
    let mut nan = good;
    nan[16..20].copy_from_slice(&f32::NAN.to_le_bytes());
    assert!(decode_tensor(&nan, here).is_err());
}

#[test]
fn rasters_round_trip() {
    let dir = tempfile::tempdir().unwrap();
    let mut rng = ChaCha8Rng::seed_from_u64(9);
    for k in 0..10 {
        let (h, w) = (rng.random_range(1..40), rng.random_range(1..40));
        let labels = LabelMap::new(h, w, (0..h * w).map(|_| rng.random_range(0..20)).collect()).unwrap();
        let p = dir.path().join(format!("l{k}.png"));
        write_label_map(&p, &labels).unwrap();
        assert_eq!(read_label_map(&p).unwrap(), labels);

        let owner: Vec<i32> = (0..h * w).map(|_| rng.random_range(-1..5)).collect();
        let sem = owner
            .iter()
            .map(|&o| if o < 0 { 0 } else { rng.random_range(0..7) })
            .collect();
        let canvas = ImageCanvas::new(format!("im{k}"), h, w, sem, owner).unwrap();
        let p = dir.path().join(format!("g{k}.png"));
        write_gt_canvas(&p, &canvas).unwrap();
        assert_eq!(read_gt_canvas(&p, canvas.image_id()).unwrap(), canvas);
    }
}

fn write_minimal_corpus(dir: &Path) -> Manifest {
    let t = ProbabilityTensor::new(3, 2, 2, vec![
        0.8, 0.1, 0.1, 0.6, //
        0.1, 0.8, 0.1, 0.2, //
        0.1, 0.1, 0.8, 0.2,
    ])
    .unwrap();
    std::fs::create_dir_all(dir.join("pred")).unwrap();
    std::fs::write(dir.join("pred/a.pqt"), encode_tensor(&t)).unwrap();
    let canvas = ImageCanvas::new("im", 4, 4, vec![0; 16], vec![-1; 16]).unwrap();
    write_gt_canvas(&dir.join("im.png"), &canvas).unwrap();
    Manifest {
        version: MANIFEST_VERSION,
        categories: vec!["bg".into(), "head".into(), "body".into()],
        images: vec![ImageEntry {
            image_id: "im".into(),
            height: 4,
            width: 4,
            gt_path: Some("im.png".into()),
        }],
        instances: vec![InstanceEntry {
            instance_id: "a".into(),
            image_id: "im".into(),
            bbox: [3, -1, 2, 2],
            box_score: 0.9,
            iou_score: Some(0.5),
            probvals_path: Some("pred/a.pqt".into()),
            labelmap_path: None,
            probmap_path: None,
        }],
    }
}

#[test]
fn manifest_round_trips_and_clips_boxes() {
    let dir = tempfile::tempdir().unwrap();
    let m = write_minimal_corpus(dir.path());
    let path = dir.path().join("manifest.json");
    save_manifest(&path, &m).unwrap();
    let corpus = load_manifest(&path).unwrap();
    assert_eq!(corpus.manifest(), &m);

    // box [3, -1, 2, 2] on a 4x4 image keeps only the bottom-left payload pixel,
    // whose argmax is category 2
    let rec = corpus.load_instance(0).unwrap();
    assert_eq!((rec.bbox().x, rec.bbox().y, rec.bbox().width, rec.bbox().height), (3, 0, 1, 1));
    assert_eq!(rec.labels().values(), &[2]);
    let mask = corpus.load_mask(0).unwrap();
    assert_eq!(mask.labels, *rec.labels());
}

#[test]
fn manifest_errors_name_the_field() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("manifest.json");

    let mut m = write_minimal_corpus(dir.path());
    m.instances[0].probvals_path = Some("pred/missing.pqt".into());
    save_manifest(&path, &m).unwrap();
    let err = load_manifest(&path).unwrap_err();
    assert!(matches!(&err, Error::Schema { field, .. } if field.contains("probvals_path")), "{err}");

    let mut m = write_minimal_corpus(dir.path());
    m.instances[0].box_score = 1.5;
    save_manifest(&path, &m).unwrap();
    assert!(matches!(load_manifest(&path), Err(Error::Schema { .. })));

    let mut m = write_minimal_corpus(dir.path());
    m.instances[0].image_id = "nope".into();
    save_manifest(&path, &m).unwrap();
    assert!(load_manifest(&path).is_err());

    std::fs::write(&path, "{\"version\": 1, \"categories\": [], \"images\": [], \"instances\": [], \"extra\": 0}")
        .unwrap();
    assert!(load_manifest(&path).is_err());

    let missing = dir.path().join("nowhere.json");
    let err = load_manifest(&missing).unwrap_err();
    assert!(err.to_string().contains("nowhere.json"));
}

#[test]
fn scores_file_rejects_out_of_range_scores() {
    let dir = tempfile::tempdir().unwrap();
    let p = dir.path().join("s.json");
    std::fs::write(
        &p,
        r#"{"version": 1, "threshold": 0.2, "weights": [1, 1, 1], "instances": [
            {"image_id": "a", "instance_id": "x", "instance_score": 1.2, "part_scores": {},
             "box_score": 1, "pixel_score": 1, "part_pixel_scores": {}}]}"#,
    )
    .unwrap();
    assert!(matches!(ScoresFile::read(&p), Err(Error::Schema { .. })));
}
