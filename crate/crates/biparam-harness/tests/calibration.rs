//! Pins the calibrated stopping constant: re-running the calibration over
//! the seeded corpus must reproduce the committed default.

use biparam_harness::config::{DEFAULT_C1, DEFAULT_C2};
use biparam_harness::corpus::calibration_corpus_1d;
use biparam_sparse::dyadic::AxisGrid;
use biparam_sparse::stopping::calibrate_c1;

#[test]
fn calibration_reproduces_default_c1() {
    let axis = AxisGrid::standard(8);
    let corpus = calibration_corpus_1d(axis);
    let c1 = calibrate_c1(&corpus, DEFAULT_C2, 24).unwrap();
    assert_eq!(c1, DEFAULT_C1);
}
