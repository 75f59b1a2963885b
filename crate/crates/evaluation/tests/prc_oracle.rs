use cloudpose_evaluation::{prc_auc, DetectionRecord, StageTimings};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

fn detection(frame: &str, count: u32, tp: bool) -> DetectionRecord {
    DetectionRecord {
        frame_id: frame.into(),
        instance_label: "obj".into(),
        predicted_label: Some("obj".into()),
        correspondence_count: count,
        est_box: None,
        gt_box: None,
        iou: None,
        mir: None,
        stage_timings: StageTimings::default(),
        is_true_positive: tp,
        error: None,
    }
}

/// Five detections against four annotated objects, enumerated by hand:
///
///   tau  kept                  TP FP  precision recall
///   3,4  10T 8T 6F 5T 4F        3  2   3/5      3/4
///   5    10T 8T 6F 5T           3  1   3/4      3/4
///   6    10T 8T 6F              2  1   2/3      1/2
///   7,8  10T 8T                 2  0   1        1/2
///   9,10 10T                    1  0   1        1/4
///
/// Anchored at (0, 1), the trapezoids sum to 1/4 + 1/4 + 17/96 = 65/96.
#[test]
fn the_five_detection_case_matches_the_hand_enumeration() {
    let records = [
        detection("a", 10, true),
        detection("a", 8, true),
        detection("b", 6, false),
        detection("b", 5, true),
        detection("b", 4, false),
    ];
    let curve = prc_auc(&records, &[2, 2]).unwrap();

    let expected = [
        (3, 3.0 / 5.0, 3.0 / 4.0),
        (4, 3.0 / 5.0, 3.0 / 4.0),
        (5, 3.0 / 4.0, 3.0 / 4.0),
        (6, 2.0 / 3.0, 1.0 / 2.0),
        (7, 1.0, 1.0 / 2.0),
        (8, 1.0, 1.0 / 2.0),
        (9, 1.0, 1.0 / 4.0),
        (10, 1.0, 1.0 / 4.0),
    ];
    assert_eq!(curve.points.len(), expected.len());
    for (point, (tau, precision, recall)) in curve.points.iter().zip(expected) {
        assert_eq!(point.threshold, tau);
        assert!((point.precision - precision).abs() < 1e-12);
        assert!((point.recall - recall).abs() < 1e-12);
    }
    assert!((curve.auc - 65.0 / 96.0).abs() < 1e-12);
}

#[test]
fn all_true_positives_integrate_to_the_top_recall() {
    let records: Vec<DetectionRecord> = [3u32, 5, 7, 9, 11]
        .iter()
        .map(|&c| detection("f", c, true))
        .collect();
    let curve = prc_auc(&records, &[10]).unwrap();
    for p in &curve.points {
        assert_eq!(p.precision, 1.0);
    }
    let top_recall = curve
        .points
        .iter()
        .map(|p| p.recall)
        .fold(0.0f64, f64::max);
    assert!((top_recall - 0.5).abs() < 1e-12);
    assert!((curve.auc - top_recall).abs() < 1e-12);
}

fn random_records(rng: &mut ChaCha8Rng) -> (Vec<DetectionRecord>, Vec<usize>) {
    let n = rng.gen_range(1..30);
    let records: Vec<DetectionRecord> = (0..n)
        .map(|i| {
            detection(
                &format!("f{}", i / 4),
                rng.gen_range(0..20),
                rng.gen_bool(0.5),
            )
        })
        .collect();
    // One annotated object per record keeps recall well defined after
    // any flip.
    (records, vec![1; n])
}

#[test]
fn promoting_any_false_positive_never_lowers_the_area() {
    let mut rng = ChaCha8Rng::seed_from_u64(0x9e37);
    for _ in 0..200 {
        let (records, gt) = random_records(&mut rng);
        let base = prc_auc(&records, &gt).unwrap().auc;
        for i in 0..records.len() {
            if records[i].is_true_positive {
                continue;
            }
            let mut flipped = records.clone();
            flipped[i].is_true_positive = true;
            let improved = prc_auc(&flipped, &gt).unwrap().auc;
            assert!(
                improved >= base - 1e-12,
                "flipping record {i} dropped auc {base} -> {improved}"
            );
        }
    }
}
