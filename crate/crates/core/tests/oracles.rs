mod common;

#[test]
fn raster_operations_match_brute_force() {
    let report = common::kernel_suite(200, 0x5eed);
    let bad: Vec<_> = report.iter().filter(|c| c.failures > 0).collect();
    assert!(bad.is_empty(), "{bad:#?}");
}

#[test]
fn scores_match_pixel_counting() {
    let (cases, failures) = common::eval_suite(100, 0xe7a1);
    assert_eq!(failures, 0, "{failures} of {cases} pairs disagree");
}
