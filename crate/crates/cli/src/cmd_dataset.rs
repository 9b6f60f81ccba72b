//! `dataset`: run the one- or two-stage selection experiment on a scored
//! file or on the bundled synthetic exam-score fixture.

use anyhow::{anyhow, bail};
use fairsel_core::dataset::{
    exam_fixture_moments, generate_synthetic_scores, histogram, load_scores, noisy_estimates,
    run_dataset_experiment, DatasetExperimentConfig, GroupMoments, LoadSchema, ScoreRecord,
};
use serde::Deserialize;
use std::collections::BTreeMap;
use std::path::PathBuf;

use crate::config::{self, GridSpec};
use crate::output::{self, Sink};
use crate::DatasetArgs;

#[derive(Debug, Deserialize)]
#[serde(default)]
struct DatasetConfig {
    input: Option<PathBuf>,
    synthetic: bool,
    fixture_divisor: usize,
    fixture_seed: u64,
    group_col: String,
    score_col: String,
    delimiter: char,
    base_sigma: f64,
    noisy_label: String,
    k_values: Vec<f64>,
    alpha1: Option<GridSpec>,
    alpha2: Option<f64>,
    replications: usize,
    seed: u64,
    algorithms: Option<Vec<String>>,
}

impl Default for DatasetConfig {
    fn default() -> Self {
        Self {
            input: None,
            synthetic: false,
            fixture_divisor: 1,
            fixture_seed: 2024,
            group_col: "group".into(),
            score_col: "score".into(),
            delimiter: ',',
            base_sigma: 10.0,
            noisy_label: "w".into(),
            k_values: vec![1.0, 4.0, 7.0, 10.0],
            alpha1: None,
            alpha2: None,
            replications: 10,
            seed: 0,
            algorithms: None,
        }
    }
}

pub fn run(args: DatasetArgs) -> anyhow::Result<u8> {
    let mut cfg: DatasetConfig = match &args.config {
        Some(path) => config::load_json(path)?,
        None => DatasetConfig::default(),
    };
    if args.input.is_some() {
        cfg.input = args.input.clone();
    }
    if args.synthetic {
        cfg.synthetic = true;
    }
    if let Some(v) = args.fixture_divisor {
        cfg.fixture_divisor = v;
    }
    if let Some(v) = &args.group_col {
        cfg.group_col = v.clone();
    }
    if let Some(v) = &args.score_col {
        cfg.score_col = v.clone();
    }
    if let Some(v) = args.delimiter {
        cfg.delimiter = v;
    }
    if let Some(v) = args.base_sigma {
        cfg.base_sigma = v;
    }
    if let Some(v) = &args.noisy_label {
        cfg.noisy_label = v.clone();
    }
    if let Some(v) = &args.k_values {
        cfg.k_values = v.clone();
    }
    if args.alpha1.is_some() {
        cfg.alpha1 = args.alpha1.clone();
    }
    if args.alpha2.is_some() {
        cfg.alpha2 = args.alpha2;
    }
    if let Some(v) = args.replications {
        cfg.replications = v;
    }
    if let Some(v) = args.seed {
        cfg.seed = v;
    }
    if args.algorithms.is_some() {
        cfg.algorithms = args.algorithms.clone();
    }

    let mut issues = Vec::new();
    if cfg.input.is_some() && cfg.synthetic {
        issues.push("choose either --input or --synthetic, not both".into());
    }
    if cfg.input.is_none() && !cfg.synthetic {
        issues.push("need an --input file or --synthetic".into());
    }
    if cfg.fixture_divisor == 0 {
        issues.push("fixture divisor must be at least 1".into());
    }
    let algorithms = config::parse_algorithms(
        &cfg.algorithms.clone().unwrap_or_else(|| {
            vec!["group-oblivious".into(), "demographic-parity".into()]
        }),
        &mut issues,
    );
    if !issues.is_empty() {
        bail!("invalid configuration:\n  - {}", issues.join("\n  - "));
    }

    let records: Vec<ScoreRecord> = if let Some(path) = &cfg.input {
        let schema = LoadSchema {
            group_column: cfg.group_col.clone(),
            score_column: cfg.score_col.clone(),
            delimiter: cfg.delimiter as u8,
        };
        let report = load_scores(path, &schema).map_err(|e| anyhow!("{e}"))?;
        let counts: Vec<String> = report
            .group_counts
            .iter()
            .map(|(label, n)| format!("{label}: {n}"))
            .collect();
        eprintln!(
            "loaded {} rows ({})",
            report.records.len(),
            counts.join(", ")
        );
        report.records
    } else {
        let groups: Vec<GroupMoments> = exam_fixture_moments()
            .into_iter()
            .map(|g| GroupMoments {
                count: (g.count / cfg.fixture_divisor).max(2),
                ..g
            })
            .collect();
        generate_synthetic_scores(&groups, cfg.fixture_seed).map_err(|e| anyhow!("{e}"))?
    };

    if let Some(path) = &args.emit_fixture {
        let mut content = format!("{},{}\n", cfg.group_col, cfg.score_col);
        for r in &records {
            content.push_str(&format!("{},{}\n", r.group_label, output::num(r.score)));
        }
        output::write_file_or_fail(path, &content)?;
    }

    let experiment = DatasetExperimentConfig {
        base_sigma: cfg.base_sigma,
        noisy_label: cfg.noisy_label.clone(),
        k_values: cfg.k_values.clone(),
        alpha1_grid: cfg
            .alpha1
            .clone()
            .unwrap_or(GridSpec { start: 0.02, stop: 0.2, count: 4 })
            .values(),
        alpha2: cfg.alpha2,
        replications: cfg.replications,
        seed: cfg.seed,
        algorithms,
    };
    let cells = run_dataset_experiment(&records, &experiment).map_err(|e| anyhow!("{e}"))?;

    if let Some(path) = &args.emit_histogram {
        let mut content = String::from("variable,k,group,bin_lo,bin_hi,count\n");
        let labels: Vec<String> = {
            let mut ls: Vec<String> = records.iter().map(|r| r.group_label.clone()).collect();
            ls.sort();
            ls.dedup();
            ls
        };
        for label in &labels {
            let scores: Vec<f64> = records
                .iter()
                .filter(|r| r.group_label == *label)
                .map(|r| r.score)
                .collect();
            let (edges, counts) = histogram(&scores, 50);
            for (i, c) in counts.iter().enumerate() {
                content.push_str(&format!(
                    "score,,{label},{},{},{c}\n",
                    output::num(edges[i]),
                    output::num(edges[i + 1])
                ));
            }
        }
        for &k in &cfg.k_values {
            let mut sigmas = BTreeMap::new();
            for label in &labels {
                let sigma = if *label == cfg.noisy_label {
                    k * cfg.base_sigma
                } else {
                    cfg.base_sigma
                };
                sigmas.insert(label.clone(), sigma);
            }
            let estimates = noisy_estimates(&records, &sigmas, cfg.seed).map_err(|e| anyhow!("{e}"))?;
            for label in &labels {
                let vals: Vec<f64> = records
                    .iter()
                    .zip(&estimates)
                    .filter(|(r, _)| r.group_label == *label)
                    .map(|(_, e)| *e)
                    .collect();
                let (edges, counts) = histogram(&vals, 50);
                for (i, c) in counts.iter().enumerate() {
                    content.push_str(&format!(
                        "estimate,{k},{label},{},{},{c}\n",
                        output::num(edges[i]),
                        output::num(edges[i + 1])
                    ));
                }
            }
        }
        output::write_file_or_fail(path, &content)?;
    }

    let sink = Sink::from_flag(&args.out);
    let mut w = sink.writer()?;
    output::write_row(
        &mut *w,
        &[
            "alpha1".into(),
            "k".into(),
            "algorithm".into(),
            "mean_utility".into(),
            "std_error".into(),
            "x_noisy".into(),
            "x_other".into(),
            "gap_vs_oblivious".into(),
        ],
    )?;
    for cell in cells {
        output::write_row(
            &mut *w,
            &[
                output::num(cell.alpha1),
                format!("{}", cell.k),
                cell.algorithm.label(),
                output::num(cell.mean_utility),
                output::num(cell.std_error),
                output::num(cell.mean_x_noisy),
                output::num(cell.mean_x_other),
                output::num(cell.gap_vs_oblivious),
            ],
        )?;
    }
    Ok(0)
}
