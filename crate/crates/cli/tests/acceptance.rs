//! Acceptance suite: one test per criterion, each printing a pass/fail line
//! (visible with `--nocapture`) and enforcing its runtime budget.
//!
//! Run with: `cargo test -p fairsel-cli --test acceptance -- --nocapture`
//!
//! Criterion 7 is kept at its stated n/K calibration and is expected to
//! fail: the ±3·SE band it prescribes at n=100, K=1000 is narrower than the
//! intrinsic O(1/n) finite-size bias of top-m selection. The companion test
//! `finite_n_convergence_companion` shows the simulator does converge to the
//! asymptotic prediction as n grows, which isolates the failure to the
//! criterion's n/K calibration rather than either engine.

use std::time::{Duration, Instant};

use fairsel_core::asymptotic::Asymptotic;
use fairsel_core::dataset::{
    exam_fixture_moments, generate_synthetic_scores, run_dataset_experiment,
    DatasetExperimentConfig,
};
use fairsel_core::model::{AlgorithmSpec, Budgets, GroupNoise, ModelParams};
use fairsel_core::montecarlo::{pairwise_gap, run_replications, SimConfig};
use fairsel_core::QualityDistribution;

fn reference_params() -> ModelParams {
    ModelParams::new(
        0.4,
        QualityDistribution::normal(1.0, 1.0).unwrap(),
        GroupNoise::new(3.0, 0.2).unwrap(),
    )
    .unwrap()
}

fn reference_model() -> Asymptotic {
    Asymptotic::new(reference_params()).unwrap()
}

fn report(criterion: &str, start: Instant, limit: Duration, detail: &str) {
    let elapsed = start.elapsed();
    println!(
        "acceptance {criterion}: PASS ({elapsed:.2?} of {limit:.0?}) — {detail}"
    );
    assert!(
        elapsed <= limit,
        "{criterion} exceeded its runtime budget: {elapsed:.2?} > {limit:.0?}"
    );
}

#[test]
fn criterion_01_group_oblivious_orderings() {
    let start = Instant::now();
    let m = reference_model();
    for alpha1 in [0.1, 0.3, 0.45, 0.55, 0.7, 0.9] {
        let x_a = m.fraction_group_oblivious(alpha1).unwrap();
        let x_b = (alpha1 - 0.4 * x_a) / 0.6;
        if alpha1 < 0.5 {
            assert!(x_a > x_b, "α₁={alpha1}: expected x_A > x_B, got {x_a} vs {x_b}");
        } else {
            assert!(x_a < x_b, "α₁={alpha1}: expected x_A < x_B, got {x_a} vs {x_b}");
        }
    }
    let x_half = m.fraction_group_oblivious(0.5).unwrap();
    assert!(
        (x_half - 0.5).abs() <= 1e-8,
        "x_A at α₁=1/2 must be 1/2 ± 1e-8, got {x_half}"
    );
    report(
        "criterion 01 (common-threshold orderings)",
        start,
        Duration::from_secs(1),
        "x_A vs x_B flips around α₁ = 1/2, equality at 1/2",
    );
}

#[test]
fn criterion_02_optimal_orderings_and_threshold_ratio() {
    let start = Instant::now();
    let m = reference_model();
    let expect_ratio = 10.0 / 1.04; // (σ_A²+σ_W²)/(σ_B²+σ_W²)
    let mut details = String::new();
    for (alpha1, smaller) in [(0.15, true), (0.8, false)] {
        let budgets = Budgets::one_stage(alpha1).unwrap();
        let x_a = m.fraction_bayesian_optimal(&budgets).unwrap();
        let x_b = (alpha1 - 0.4 * x_a) / 0.6;
        if smaller {
            assert!(x_a < x_b, "α₁={alpha1}: expected x_A^opt < x_B^opt");
        } else {
            assert!(x_a > x_b, "α₁={alpha1}: expected x_A^opt > x_B^opt");
        }
        let fs = m.first_stage(x_a, alpha1).unwrap();
        let ratio = (fs.th_a - 1.0) / (fs.th_b - 1.0);
        let rel = ((ratio - expect_ratio) / expect_ratio).abs();
        assert!(
            rel <= 1e-6,
            "α₁={alpha1}: threshold ratio {ratio} vs {expect_ratio} (rel {rel:.2e})"
        );
        details.push_str(&format!("α₁={alpha1}: x_A^opt={x_a:.6}, ratio rel err {rel:.1e}; "));
    }
    report(
        "criterion 02 (optimal orderings and threshold ratio)",
        start,
        Duration::from_secs(5),
        &details,
    );
}

#[test]
fn criterion_03_one_stage_utility_ordering() {
    let start = Instant::now();
    let m = reference_model();
    for alpha1 in [0.15, 0.35, 0.6, 0.8] {
        let budgets = Budgets::one_stage(alpha1).unwrap();
        let q_dp = m.run(&AlgorithmSpec::DemographicParity, &budgets).unwrap().utility;
        let q_fair = m.run(&AlgorithmSpec::GammaRule(0.8), &budgets).unwrap().utility;
        let q_obl = m.run(&AlgorithmSpec::GroupOblivious, &budgets).unwrap().utility;
        assert!(
            q_dp - q_fair > 1e-6,
            "α₁={alpha1}: strict gap dp−fair = {} must exceed 1e-6",
            q_dp - q_fair
        );
        assert!(
            q_fair >= q_obl - 1e-12,
            "α₁={alpha1}: fair must not lose to oblivious ({q_fair} vs {q_obl})"
        );
    }
    let budgets = Budgets::one_stage(0.5).unwrap();
    let q_dp = m.run(&AlgorithmSpec::DemographicParity, &budgets).unwrap().utility;
    let q_fair = m.run(&AlgorithmSpec::GammaRule(0.8), &budgets).unwrap().utility;
    let q_obl = m.run(&AlgorithmSpec::GroupOblivious, &budgets).unwrap().utility;
    assert!((q_dp - q_obl).abs() <= 1e-8 && (q_dp - q_fair).abs() <= 1e-8);
    report(
        "criterion 03 (one-stage Q^dp > Q^fair ≥ Q^obl)",
        start,
        Duration::from_secs(10),
        "strict at four budgets, all equal at α₁ = 1/2",
    );
}

#[test]
fn criterion_04_two_stage_ordering_and_bounded_harm() {
    let start = Instant::now();
    let m = reference_model();
    for alpha1 in [0.12, 0.15, 0.55, 0.7, 0.9] {
        let budgets = Budgets::new(alpha1, 0.1).unwrap();
        let q_dp = m.run(&AlgorithmSpec::DemographicParity, &budgets).unwrap().utility;
        let q_obl = m.run(&AlgorithmSpec::GroupOblivious, &budgets).unwrap().utility;
        assert!(q_dp > q_obl, "α₁={alpha1}: Q^dp = {q_dp} vs Q^obl = {q_obl}");
    }
    let budgets = Budgets::new(0.5, 0.1).unwrap();
    let q_dp = m.run(&AlgorithmSpec::DemographicParity, &budgets).unwrap().utility;
    let q_obl = m.run(&AlgorithmSpec::GroupOblivious, &budgets).unwrap().utility;
    assert!((q_dp - q_obl).abs() <= 1e-8, "equality at α₁ = 1/2");

    let mut min_gap = f64::INFINITY;
    for i in 0..=45 {
        let alpha1 = 0.1 + 0.02 * i as f64;
        let budgets = Budgets::new(alpha1, 0.1).unwrap();
        let q_dp = m.run(&AlgorithmSpec::DemographicParity, &budgets).unwrap().utility;
        let q_obl = m.run(&AlgorithmSpec::GroupOblivious, &budgets).unwrap().utility;
        min_gap = min_gap.min((q_dp - q_obl) / q_obl);
    }
    assert!(
        min_gap >= -0.02,
        "parity harm must stay above −2%, worst gap {min_gap:.4}"
    );
    report(
        "criterion 04 (two-stage ordering, harm ≤ 2%)",
        start,
        Duration::from_secs(60),
        &format!("worst gap over α₁ ∈ [0.1,1]: {min_gap:.4}"),
    );
}

fn gradient_grid(m: &Asymptotic, budgets: &Budgets) -> (f64, bool) {
    let (lo, hi) = m.feasible_interval(budgets.alpha1());
    let a = lo + 0.08 * (hi - lo);
    let b = hi - 0.08 * (hi - lo);
    let h = 1e-4;
    let mut derivatives = Vec::with_capacity(20);
    let mut worst: f64 = 0.0;
    for i in 0..20 {
        let x = a + (b - a) * i as f64 / 19.0;
        let d = m.utility_derivative(x, budgets).unwrap();
        let fd = (m.utility(x + h, budgets).unwrap().utility
            - m.utility(x - h, budgets).unwrap().utility)
            / (2.0 * h);
        derivatives.push(d);
        worst = worst.max((d - fd).abs() / d.abs().max(fd.abs()).max(1e-3));
    }
    let strictly_decreasing = derivatives.windows(2).all(|w| w[1] < w[0]);
    (worst, strictly_decreasing)
}

/// Three parameter sets covering the one- and two-stage derivative formulas
/// on both the closed normal path and the general quadrature path.
fn gradient_cases() -> Vec<(Asymptotic, Budgets, &'static str)> {
    let pareto = || {
        Asymptotic::new(
            ModelParams::new(
                0.4,
                QualityDistribution::pareto(1.0, 3.0).unwrap(),
                GroupNoise::new(2.0, 1.0).unwrap(),
            )
            .unwrap(),
        )
        .unwrap()
    };
    vec![
        (reference_model(), Budgets::one_stage(0.35).unwrap(), "normal one-stage"),
        (reference_model(), Budgets::new(0.5, 0.1).unwrap(), "normal two-stage"),
        (pareto(), Budgets::one_stage(0.3).unwrap(), "pareto one-stage"),
        (pareto(), Budgets::new(0.3, 0.1).unwrap(), "pareto two-stage"),
    ]
}

#[test]
fn criterion_05_gradient_matches_finite_differences() {
    let start = Instant::now();
    let mut details = String::new();
    for (m, budgets, label) in &gradient_cases() {
        let (worst, _) = gradient_grid(m, budgets);
        assert!(
            worst <= 1e-4,
            "{label}: derivative vs finite differences rel err {worst:.2e} > 1e-4"
        );
        details.push_str(&format!("{label}: {worst:.1e}; "));
    }
    report(
        "criterion 05 (analytic gradient vs finite differences)",
        start,
        Duration::from_secs(60),
        &details,
    );
}

#[test]
fn criterion_06_concavity_on_every_grid() {
    let start = Instant::now();
    for (m, budgets, label) in &gradient_cases() {
        let (_, strictly_decreasing) = gradient_grid(m, budgets);
        assert!(strictly_decreasing, "{label}: dQ/dx_A must be strictly decreasing");
    }
    report(
        "criterion 06 (strict concavity)",
        start,
        Duration::from_secs(60),
        "dQ/dx_A strictly decreasing on all evaluated grids",
    );
}

#[test]
fn criterion_07_finite_n_accuracy_as_stated() {
    let start = Instant::now();
    let params = reference_params();
    let model = reference_model();
    let mut coverage = Vec::new();
    let mut log = String::new();
    for alg in [AlgorithmSpec::GroupOblivious, AlgorithmSpec::DemographicParity] {
        let mut inside = 0usize;
        for m1 in (10..=100).step_by(10) {
            let budgets = Budgets::new(m1 as f64 / 100.0, 0.1).unwrap();
            let cfg = SimConfig {
                n: 100,
                params: params.clone(),
                budgets,
                algorithm: alg.clone(),
                replications: 1000,
                seed: 13,
            };
            let r = run_replications(&cfg).unwrap();
            let q_inf = model.run(&alg, &budgets).unwrap().utility;
            let dev = (r.mean_utility - q_inf).abs();
            if dev <= 3.0 * r.std_error {
                inside += 1;
            } else {
                log.push_str(&format!(
                    "{} m1={m1}: |{:.4}-{:.4}| = {:.4} > 3·SE = {:.4}\n",
                    alg.label(),
                    r.mean_utility,
                    q_inf,
                    dev,
                    3.0 * r.std_error
                ));
            }
        }
        coverage.push((alg.label(), inside));
    }
    let elapsed = start.elapsed();
    assert!(elapsed <= Duration::from_secs(120), "runtime budget exceeded");
    for (label, inside) in &coverage {
        if *inside * 10 < 90 {
            println!(
                "acceptance criterion 07 (finite-n accuracy): FAIL — {label} has {inside}/10 \
                 grid points inside ±3·SE (needs ≥ 9/10). The finite-population mean sits an \
                 O(1/n) order-statistics bias (≈ −0.03 at n=100) below the n=∞ value, wider \
                 than the prescribed band; see finite_n_convergence_companion and the README."
            );
        }
    }
    assert!(
        coverage.iter().all(|(_, inside)| *inside * 10 >= 90),
        "±3·SE coverage below 90%:\n{log}"
    );
    report(
        "criterion 07 (finite-n accuracy)",
        start,
        Duration::from_secs(120),
        "within ±3·SE for ≥90% of the m₁ grid",
    );
}

/// Companion to criterion 7 (not itself a criterion): the simulator converges
/// to the asymptotic prediction as n grows, so the criterion's failure is its
/// own n/K calibration, not an engine defect.
#[test]
fn finite_n_convergence_companion() {
    let params = reference_params();
    let model = reference_model();
    let budgets = Budgets::new(0.5, 0.1).unwrap();
    let q_inf = model
        .run(&AlgorithmSpec::GroupOblivious, &budgets)
        .unwrap()
        .utility;
    let mut biases = Vec::new();
    for (n, k) in [(100usize, 2000usize), (400, 1000), (1600, 600)] {
        let cfg = SimConfig {
            n,
            params: params.clone(),
            budgets,
            algorithm: AlgorithmSpec::GroupOblivious,
            replications: k,
            seed: 5,
        };
        let r = run_replications(&cfg).unwrap();
        biases.push((n, r.mean_utility - q_inf, r.std_error));
    }
    // bias shrinks roughly like 1/n ...
    assert!(biases[0].1.abs() > 3.0 * biases[1].1.abs().max(biases[1].2));
    // ... and is inside the ±3·SE band by n=1600
    let (_, bias, se) = biases[2];
    assert!(
        bias.abs() <= 3.0 * se,
        "n=1600 should match the asymptote: bias {bias:.5}, SE {se:.5}"
    );
}

#[test]
fn criterion_08_pareto_experiment() {
    let start = Instant::now();
    let mut details = String::new();
    for sigma_a in [2.0, 4.0] {
        let params = ModelParams::new(
            0.4,
            QualityDistribution::pareto(1.0, 3.0).unwrap(),
            GroupNoise::new(sigma_a, 1.0).unwrap(),
        )
        .unwrap();
        let gap_at = |budgets: Budgets| -> (f64, f64) {
            let mk = |algorithm: AlgorithmSpec| SimConfig {
                n: 10_000,
                params: params.clone(),
                budgets,
                algorithm,
                replications: 20,
                seed: 99,
            };
            let dp = run_replications(&mk(AlgorithmSpec::DemographicParity)).unwrap();
            let obl = run_replications(&mk(AlgorithmSpec::GroupOblivious)).unwrap();
            pairwise_gap(&dp, &obl)
        };
        let (gain, _) = gap_at(Budgets::one_stage(0.02).unwrap());
        assert!(
            gain > 0.0,
            "σ_A={sigma_a}: parity gain at α₁=0.02 must be positive, got {gain:.4}"
        );
        let mut worst_loss = 0.0f64;
        for alpha1 in [0.3, 0.35, 0.4, 0.45, 0.5] {
            let (gap, _) = gap_at(Budgets::one_stage(alpha1).unwrap());
            worst_loss = worst_loss.min(gap);
        }
        assert!(
            worst_loss >= -0.005,
            "σ_A={sigma_a}: parity loss over α₁ ∈ [0.3,0.5] must stay above −0.5%, got {worst_loss:.4}"
        );
        // with the refining stage at α₂ = 0.01 the tight-budget gain persists
        let (gain_two_stage, _) = gap_at(Budgets::new(0.02, 0.01).unwrap());
        assert!(
            gain_two_stage > 0.0,
            "σ_A={sigma_a}: two-stage parity gain at α₁=0.02 must be positive, got {gain_two_stage:.4}"
        );
        details.push_str(&format!(
            "σ_A={sigma_a}: gain(0.02)={gain:.3} (two-stage {gain_two_stage:.3}), worst mid-range loss={worst_loss:.4}; "
        ));
    }
    report(
        "criterion 08 (heavy-tailed quality experiment)",
        start,
        Duration::from_secs(180),
        &details,
    );
}

#[test]
fn criterion_09_dataset_pipeline_sign_pattern() {
    let start = Instant::now();
    let rows = generate_synthetic_scores(&exam_fixture_moments(), 2024).unwrap();
    let config = DatasetExperimentConfig {
        base_sigma: 10.0,
        noisy_label: "w".into(),
        k_values: vec![1.0, 4.0, 7.0, 10.0],
        alpha1_grid: vec![0.02],
        alpha2: None,
        replications: 10,
        seed: 7,
        algorithms: vec![AlgorithmSpec::DemographicParity],
    };
    let cells = run_dataset_experiment(&rows, &config).unwrap();
    let gaps: Vec<f64> = cells.iter().map(|c| c.gap_vs_oblivious).collect();
    assert_eq!(gaps.len(), 4);
    assert!(
        gaps[0] < -0.002 && gaps[0] > -0.08,
        "k=1 gap should be a small loss, got {:.4}",
        gaps[0]
    );
    for (i, k) in [4.0, 7.0, 10.0].iter().enumerate() {
        assert!(gaps[i + 1] > 0.0, "k={k} gap should be positive, got {:.4}", gaps[i + 1]);
    }
    for w in gaps.windows(2) {
        assert!(w[0] < w[1], "gap must increase with k: {gaps:?}");
    }
    report(
        "criterion 09 (dataset pipeline sign pattern)",
        start,
        Duration::from_secs(120),
        &format!(
            "gaps at k=1,4,7,10: {:+.4}, {:+.4}, {:+.4}, {:+.4}",
            gaps[0], gaps[1], gaps[2], gaps[3]
        ),
    );
}

#[test]
fn criterion_10_montecarlo_cli_determinism() {
    let start = Instant::now();
    let bin = env!("CARGO_BIN_EXE_fairsel");
    let dir = tempfile::tempdir().unwrap();
    let run = |name: &str| -> Vec<u8> {
        let out = dir.path().join(name);
        let status = std::process::Command::new(bin)
            .args([
                "montecarlo",
                "--n",
                "200",
                "--alpha1",
                "0.1:0.5:3",
                "--alpha2",
                "0.1",
                "--replications",
                "50",
                "--seed",
                "77",
                "--out",
            ])
            .arg(&out)
            .status()
            .expect("binary runs");
        assert!(status.success());
        std::fs::read(&out).unwrap()
    };
    let first = run("a.csv");
    let second = run("b.csv");
    assert_eq!(first, second, "same seed must give byte-identical CSV");
    assert!(!first.is_empty());
    report(
        "criterion 10 (seeded CLI determinism)",
        start,
        Duration::from_secs(30),
        &format!("{} identical bytes", first.len()),
    );
}
