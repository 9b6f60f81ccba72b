//! End-to-end dataset experiments on a reduced synthetic fixture: sign and
//! monotonicity structure of the parity-vs-oblivious gap, budget exactness,
//! and score preservation.

use fairsel_core::dataset::{
    exam_fixture_moments, generate_synthetic_scores, run_dataset_experiment,
    DatasetExperimentConfig, GroupMoments,
};
use fairsel_core::model::AlgorithmSpec;

/// A 1/40-scale fixture keeps this suite fast; the acceptance suite runs the
/// 1/10 scale.
fn small_fixture() -> Vec<fairsel_core::dataset::ScoreRecord> {
    let groups: Vec<GroupMoments> = exam_fixture_moments()
        .into_iter()
        .map(|g| GroupMoments {
            count: g.count / 4,
            ..g
        })
        .collect();
    generate_synthetic_scores(&groups, 2024).unwrap()
}

#[test]
fn gap_is_monotone_in_noise_ratio_at_small_budget() {
    let rows = small_fixture();
    let config = DatasetExperimentConfig {
        base_sigma: 10.0,
        noisy_label: "w".into(),
        k_values: vec![1.0, 4.0, 7.0, 10.0],
        alpha1_grid: vec![0.02],
        alpha2: None,
        replications: 8,
        seed: 7,
        algorithms: vec![AlgorithmSpec::DemographicParity],
    };
    let cells = run_dataset_experiment(&rows, &config).unwrap();
    let gaps: Vec<f64> = cells.iter().map(|c| c.gap_vs_oblivious).collect();
    assert_eq!(gaps.len(), 4);
    for w in gaps.windows(2) {
        assert!(w[0] < w[1], "gap must grow with the noise ratio: {gaps:?}");
    }
    assert!(gaps[0] < 0.0, "equal noise loses a little: {}", gaps[0]);
    assert!(gaps[3] > 0.1, "large noise ratio gains a lot: {}", gaps[3]);
}

#[test]
fn two_stage_dataset_run_brings_curves_together() {
    // with a roomy first stage and a strict second stage, parity and
    // oblivious converge: the second stage fixes either first-stage choice
    let rows = small_fixture();
    let one = DatasetExperimentConfig {
        base_sigma: 10.0,
        noisy_label: "w".into(),
        k_values: vec![10.0],
        alpha1_grid: vec![0.02],
        alpha2: None,
        replications: 8,
        seed: 3,
        algorithms: vec![AlgorithmSpec::DemographicParity],
    };
    let two = DatasetExperimentConfig {
        alpha1_grid: vec![0.6],
        alpha2: Some(0.02),
        ..one.clone()
    };
    let tight = run_dataset_experiment(&rows, &one).unwrap()[0].gap_vs_oblivious;
    let roomy = run_dataset_experiment(&rows, &two).unwrap()[0].gap_vs_oblivious;
    assert!(
        roomy.abs() < tight.abs(),
        "roomy first stage should shrink the gap: one-stage {tight}, two-stage {roomy}"
    );
}

#[test]
fn utilities_come_from_true_scores_only() {
    // huge noise cannot push the mean utility outside the true score range
    let rows = small_fixture();
    let max_score = rows.iter().map(|r| r.score).fold(f64::NEG_INFINITY, f64::max);
    let config = DatasetExperimentConfig {
        base_sigma: 1e6,
        noisy_label: "w".into(),
        k_values: vec![1.0],
        alpha1_grid: vec![0.1],
        alpha2: None,
        replications: 3,
        seed: 5,
        algorithms: vec![AlgorithmSpec::GroupOblivious],
    };
    let cells = run_dataset_experiment(&rows, &config).unwrap();
    assert!(cells[0].mean_utility <= max_score);
    assert!(cells[0].mean_utility.is_finite());
}

#[test]
fn selection_fractions_sum_to_budget() {
    let rows = small_fixture();
    let n = rows.len() as f64;
    let n_w = rows.iter().filter(|r| r.group_label == "w").count() as f64;
    let n_m = n - n_w;
    let config = DatasetExperimentConfig {
        base_sigma: 10.0,
        noisy_label: "w".into(),
        k_values: vec![4.0],
        alpha1_grid: vec![0.05, 0.2],
        alpha2: None,
        replications: 4,
        seed: 9,
        algorithms: vec![AlgorithmSpec::GroupOblivious, AlgorithmSpec::DemographicParity],
    };
    for cell in run_dataset_experiment(&rows, &config).unwrap() {
        let m1 = (cell.alpha1 * n).floor();
        let selected = cell.mean_x_noisy * n_w + cell.mean_x_other * n_m;
        assert!(
            (selected - m1).abs() < 1e-6,
            "exactly m1 selected: {selected} vs {m1}"
        );
    }
}

#[test]
fn deterministic_under_fixed_seeds() {
    let rows = small_fixture();
    let config = DatasetExperimentConfig {
        base_sigma: 10.0,
        noisy_label: "w".into(),
        k_values: vec![4.0],
        alpha1_grid: vec![0.05],
        alpha2: None,
        replications: 4,
        seed: 11,
        algorithms: vec![AlgorithmSpec::DemographicParity],
    };
    let a = run_dataset_experiment(&rows, &config).unwrap();
    let b = run_dataset_experiment(&rows, &config).unwrap();
    assert_eq!(a.len(), b.len());
    for (x, y) in a.iter().zip(&b) {
        assert_eq!(x.mean_utility, y.mean_utility);
        assert_eq!(x.gap_vs_oblivious, y.gap_vs_oblivious);
    }
}
