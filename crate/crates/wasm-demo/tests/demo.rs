use texseg_wasm_demo::{build_mosaic, run_segmentation, MAX_SIDE};

#[test]
fn generate_segment_and_inspect() {
    let mosaic = build_mosaic("ma1,ma2", "vsplit", 64, 2, 3).unwrap();
    assert_eq!(mosaic.side(), 64);
    assert_eq!(mosaic.gray().len(), 64 * 64);
    let truth = mosaic.truth_gray();
    assert_eq!((truth[0], truth[63]), (0, 255));

    let seg = run_segmentation(&mosaic, "kmeans", 2, 8, true, 1).unwrap();
    assert_eq!(seg.clusters(), 2);
    assert_eq!(seg.labels().len(), 64 * 64);
    assert!(seg.accuracy() > 0.9, "{}", seg.accuracy());

    let observed = mosaic.feature_at(10, 5, 2);
    let expected = mosaic.true_feature_at(10, 5, 2);
    assert_eq!(observed.len(), 25);
    assert_eq!(expected.len(), 25);
    // centre lag is the variance; the standardized model has variance one
    assert!((expected[12] - 1.0).abs() < 1e-12);
    assert_eq!(mosaic.region_at(10, 5), 0);
    assert_eq!(mosaic.region_at(10, 60), 1);
}

#[test]
fn rejects_bad_input() {
    assert!(build_mosaic("ma1", "quadrants", 32, 2, 0).is_err());
    assert!(build_mosaic("ma7,ma1", "vsplit", 32, 2, 0).is_err());
    assert!(build_mosaic("ma1,ma2", "vsplit", MAX_SIDE + 1, 2, 0).is_err());
    let mosaic = build_mosaic("ma3,ma4", "vsplit", 32, 1, 0).unwrap();
    assert!(run_segmentation(&mosaic, "dbscan", 2, 0, true, 0).is_err());
}

#[test]
fn same_seed_same_pixels() {
    let a = build_mosaic("ma1,ma2,ma3,ma4", "quadrants", 32, 1, 9).unwrap();
    let b = build_mosaic("ma1,ma2,ma3,ma4", "quadrants", 32, 1, 9).unwrap();
    assert_eq!(a.gray(), b.gray());
    let sa = run_segmentation(&a, "ward", 4, 3, true, 0).unwrap();
    let sb = run_segmentation(&b, "ward", 4, 3, true, 0).unwrap();
    assert_eq!(sa.labels(), sb.labels());
}
