//! For two-paper bundles the predicted performance of a rule and the mean of
//! simulated exams must agree closely.

use peergrade::noise::{GraderModel, NoiseMatrix};
use peergrade::optimizer::{optimize, DEFAULT_THRESHOLD};
use peergrade::rational::to_f64;
use peergrade::simulator::{run_batch, BatchOptions, ExamConfig};
use peergrade::theory::{predicted_performance, weight_matrix, ObjectiveSpec};
use peergrade::types::{borda_ordering, TieBreak};

const TOL: f64 = 0.01;

#[test]
fn k2_marginal_graders_match_theory() {
    let matrix = NoiseMatrix::from_decimal_rows("k2", &[vec!["0.75", "0.25"], vec!["0.25", "0.75"]]).unwrap();
    let objectives = ObjectiveSpec::builtins();
    let borda = borda_ordering(2, TieBreak::Tied).unwrap();
    let model = GraderModel::marginal(matrix.clone()).unwrap();
    let config = ExamConfig::new(2000, 2, model, 17, 200).unwrap();
    let res = run_batch(
        &config,
        &[("borda".to_string(), borda.clone())],
        &objectives,
        &BatchOptions::default(),
    )
    .unwrap();
    for spec in &objectives {
        let w = weight_matrix(2, &matrix, spec).unwrap();
        let theory = to_f64(&predicted_performance(&borda, &w).unwrap());
        let sim = res.summary("borda", spec.name()).unwrap().mean;
        assert!(
            (theory - sim).abs() < TOL,
            "{}: theory {theory:.4}, simulated {sim:.4}",
            spec.name()
        );
        // Under any noise Borda is optimal for k = 2.
        let opt = optimize(2, &matrix, spec, DEFAULT_THRESHOLD).unwrap();
        assert_eq!(opt.predicted, predicted_performance(&borda, &w).unwrap());
    }
}

#[test]
fn k3_perfect_grading_matches_theory() {
    let matrix = NoiseMatrix::identity(3).unwrap();
    let borda = borda_ordering(3, TieBreak::Tied).unwrap();
    let spec = ObjectiveSpec::all2all();
    let w = weight_matrix(3, &matrix, &spec).unwrap();
    let theory = to_f64(&predicted_performance(&borda, &w).unwrap());
    let config = ExamConfig::new(2000, 3, GraderModel::Perfect, 5, 100).unwrap();
    let res = run_batch(&config, &[("borda".into(), borda)], &[spec], &BatchOptions::default()).unwrap();
    let sim = res.summary("borda", "all2all").unwrap().mean;
    assert!((theory - sim).abs() < TOL, "theory {theory:.4}, simulated {sim:.4}");
}
