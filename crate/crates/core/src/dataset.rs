//! Scored-dataset experiments: load a two-group score file, inject
//! group-dependent estimation noise, and run the finite-population selection
//! algorithms on the resulting candidates.
//!
//! True scores are never modified: noise only perturbs the stage-one
//! estimates, and utility is always the mean of original scores of the final
//! selection.

use std::collections::BTreeMap;
use std::path::Path;

use rand::RngCore;
use rand_chacha::rand_core::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::model::{AlgorithmSpec, Group};
use crate::montecarlo::{replication_seed, select_first_stage, select_second_stage, Candidate};
use crate::stdnorm;

#[derive(Debug, Clone, PartialEq)]
pub struct ScoreRecord {
    pub group_label: String,
    pub score: f64,
}

#[derive(Debug, Clone)]
pub struct LoadSchema {
    pub group_column: String,
    pub score_column: String,
    pub delimiter: u8,
}

impl Default for LoadSchema {
    fn default() -> Self {
        Self {
            group_column: "group".into(),
            score_column: "score".into(),
            delimiter: b',',
        }
    }
}

#[derive(Debug, Clone)]
pub struct LoadReport {
    pub records: Vec<ScoreRecord>,
    /// Label → row count, in label order.
    pub group_counts: BTreeMap<String, usize>,
}

/// Parse a delimited score file with a header row. Rejects malformed rows
/// (missing columns, non-numeric or empty scores) with their line number,
/// and requires exactly two distinct group labels.
pub fn load_scores(path: &Path, schema: &LoadSchema) -> Result<LoadReport> {
    let mut reader = csv::ReaderBuilder::new()
        .delimiter(schema.delimiter)
        .flexible(true)
        .from_path(path)
        .map_err(|e| Error::Config(format!("cannot open {}: {e}", path.display())))?;

    let headers = reader
        .headers()
        .map_err(|e| Error::Parse {
            line: 1,
            message: format!("bad header: {e}"),
        })?
        .clone();
    let col = |name: &str| -> Result<usize> {
        headers.iter().position(|h| h == name).ok_or_else(|| Error::Parse {
            line: 1,
            message: format!(
                "missing column '{name}' (available: {})",
                headers.iter().collect::<Vec<_>>().join(", ")
            ),
        })
    };
    let group_idx = col(&schema.group_column)?;
    let score_idx = col(&schema.score_column)?;

    let mut records = Vec::new();
    let mut group_counts: BTreeMap<String, usize> = BTreeMap::new();
    for (row_number, row) in reader.records().enumerate() {
        let line = row_number + 2; // header is line 1
        let row = row.map_err(|e| Error::Parse {
            line,
            message: format!("{e}"),
        })?;
        let group = row.get(group_idx).ok_or_else(|| Error::Parse {
            line,
            message: "row too short for the group column".into(),
        })?;
        let raw_score = row.get(score_idx).ok_or_else(|| Error::Parse {
            line,
            message: "row too short for the score column".into(),
        })?;
        if raw_score.trim().is_empty() {
            return Err(Error::Parse {
                line,
                message: "empty score".into(),
            });
        }
        let score: f64 = raw_score.trim().parse().map_err(|_| Error::Parse {
            line,
            message: format!("non-numeric score '{raw_score}'"),
        })?;
        let label = group.trim().to_string();
        *group_counts.entry(label.clone()).or_insert(0) += 1;
        if group_counts.len() > 2 {
            return Err(Error::Parse {
                line,
                message: format!(
                    "more than two group labels: {}",
                    group_counts.keys().cloned().collect::<Vec<_>>().join(", ")
                ),
            });
        }
        records.push(ScoreRecord {
            group_label: label,
            score,
        });
    }
    if group_counts.len() != 2 {
        return Err(Error::Config(format!(
            "need exactly two group labels, found {}",
            group_counts.len()
        )));
    }
    Ok(LoadReport {
        records,
        group_counts,
    })
}

/// Noise and budget grid for a dataset experiment. The reference group gets
/// `base_sigma`; the `noisy_label` group gets k·base_sigma for each k.
#[derive(Debug, Clone)]
pub struct DatasetExperimentConfig {
    pub base_sigma: f64,
    pub noisy_label: String,
    pub k_values: Vec<f64>,
    pub alpha1_grid: Vec<f64>,
    /// None runs one-stage selections (α₂ = α₁).
    pub alpha2: Option<f64>,
    pub replications: usize,
    pub seed: u64,
    pub algorithms: Vec<AlgorithmSpec>,
}

/// One output cell of the experiment table.
#[derive(Debug, Clone)]
pub struct DatasetCell {
    pub alpha1: f64,
    pub k: f64,
    pub algorithm: AlgorithmSpec,
    pub mean_utility: f64,
    pub std_error: f64,
    /// Mean stage-one selected fraction of the noisy group.
    pub mean_x_noisy: f64,
    pub mean_x_other: f64,
    /// Mean paired relative gap versus group-oblivious on the same draws.
    pub gap_vs_oblivious: f64,
}

/// Run the experiment grid: for every (k, replication) the noise is redrawn
/// once and shared by every α₁ and every algorithm (common random numbers),
/// then each (α₁, algorithm) selects exactly m₁ then m₂ candidates.
pub fn run_dataset_experiment(
    records: &[ScoreRecord],
    config: &DatasetExperimentConfig,
) -> Result<Vec<DatasetCell>> {
    let n = records.len();
    if n < 2 {
        return Err(Error::Config("need at least two records".into()));
    }
    let mut labels: Vec<String> = Vec::new();
    for r in records {
        if !labels.contains(&r.group_label) {
            labels.push(r.group_label.clone());
        }
    }
    labels.sort();
    if labels.len() != 2 {
        return Err(Error::Config(format!(
            "need exactly two group labels, found {}",
            labels.len()
        )));
    }
    if !labels.contains(&config.noisy_label) {
        return Err(Error::Config(format!(
            "noisy label '{}' not present in the data (labels: {labels:?})",
            config.noisy_label
        )));
    }
    if !(config.base_sigma >= 0.0) || config.k_values.iter().any(|k| !(*k >= 0.0)) {
        return Err(Error::Config("noise scales must be nonnegative".into()));
    }
    if config.replications == 0 {
        return Err(Error::Config("need at least one replication".into()));
    }
    let alpha2 = config.alpha2;
    if let Some(a2) = alpha2 {
        if !(a2 > 0.0 && a2 <= 1.0) {
            return Err(Error::Config(format!("alpha2 must be in (0,1], got {a2}")));
        }
    }
    for &a1 in &config.alpha1_grid {
        if !(a1 > 0.0 && a1 <= 1.0) {
            return Err(Error::Config(format!("alpha1 must be in (0,1], got {a1}")));
        }
        let m1 = (a1 * n as f64).floor() as usize;
        let m2 = (alpha2.unwrap_or(a1) * n as f64).floor() as usize;
        if m2 < 1 {
            return Err(Error::Config(format!(
                "alpha2 = {} yields an empty final selection for n = {n}",
                alpha2.unwrap_or(a1)
            )));
        }
        if m2 > m1 {
            return Err(Error::Config(format!(
                "alpha2 yields m2 = {m2} > m1 = {m1} at alpha1 = {a1}"
            )));
        }
    }

    let mut cells = Vec::new();
    for (k_idx, &k) in config.k_values.iter().enumerate() {
        // the noisy group plays the high-variance role A when k >= 1
        let sigma_noisy = k * config.base_sigma;
        let (label_a, label_b) = if sigma_noisy >= config.base_sigma {
            (config.noisy_label.clone(), other_label(&labels, &config.noisy_label))
        } else {
            (other_label(&labels, &config.noisy_label), config.noisy_label.clone())
        };
        let sigma_of = |label: &str| -> f64 {
            if label == config.noisy_label {
                sigma_noisy
            } else {
                config.base_sigma
            }
        };
        let sigma_a = sigma_of(&label_a);
        let sigma_b = sigma_of(&label_b);
        let n_a = records.iter().filter(|r| r.group_label == label_a).count();

        // one candidate view per replication, shared across α₁ and algorithms
        let populations: Vec<Vec<Candidate>> = (0..config.replications)
            .into_par_iter()
            .map(|rep| {
                let stream = (k_idx as u64) << 32 | rep as u64;
                let mut rng = ChaCha8Rng::seed_from_u64(replication_seed(config.seed, stream));
                records
                    .iter()
                    .enumerate()
                    .map(|(i, r)| {
                        let group = if r.group_label == label_a {
                            Group::A
                        } else {
                            Group::B
                        };
                        let sigma = match group {
                            Group::A => sigma_a,
                            Group::B => sigma_b,
                        };
                        let u = ((rng.next_u64() >> 11) as f64 + 0.5) / (1u64 << 53) as f64;
                        let eps = stdnorm::quantile(u).expect("u in (0,1)");
                        Candidate {
                            group,
                            w: r.score,
                            w_hat: r.score + sigma * eps,
                            index: i as u32,
                        }
                    })
                    .collect()
            })
            .collect();

        for &alpha1 in &config.alpha1_grid {
            let m1 = (alpha1 * n as f64).floor() as usize;
            let m2 = (alpha2.unwrap_or(alpha1) * n as f64).floor() as usize;
            let run_one = |alg: &AlgorithmSpec| -> Result<(Vec<f64>, f64, f64)> {
                let per_rep: Vec<(f64, usize)> = populations
                    .par_iter()
                    .map(|pop| -> Result<(f64, usize)> {
                        let first = select_first_stage(pop, alg, m1, None)?;
                        let final_sel = select_second_stage(&first.selected, m2)?;
                        let utility = final_sel.iter().map(|c| c.w).sum::<f64>() / m2 as f64;
                        let sel_a = first
                            .selected
                            .iter()
                            .filter(|c| c.group == Group::A)
                            .count();
                        Ok((utility, sel_a))
                    })
                    .collect::<Result<_>>()?;
                let kf = per_rep.len() as f64;
                let utilities: Vec<f64> = per_rep.iter().map(|r| r.0).collect();
                let mean_sel_a = per_rep.iter().map(|r| r.1 as f64).sum::<f64>() / kf;
                let x_a = mean_sel_a / n_a as f64;
                let x_b = (m1 as f64 - mean_sel_a) / (n - n_a) as f64;
                // report fractions keyed by noisy/other, not by A/B
                let (x_noisy, x_other) = if label_a == config.noisy_label {
                    (x_a, x_b)
                } else {
                    (x_b, x_a)
                };
                Ok((utilities, x_noisy, x_other))
            };

            let (base_utilities, base_x_noisy, base_x_other) =
                run_one(&AlgorithmSpec::GroupOblivious)?;
            for alg in &config.algorithms {
                let (utilities, x_noisy, x_other) = if *alg == AlgorithmSpec::GroupOblivious {
                    (base_utilities.clone(), base_x_noisy, base_x_other)
                } else {
                    run_one(alg)?
                };
                let kf = utilities.len() as f64;
                let mean = utilities.iter().sum::<f64>() / kf;
                let se = if utilities.len() > 1 {
                    let var = utilities.iter().map(|u| (u - mean).powi(2)).sum::<f64>()
                        / (kf - 1.0);
                    (var / kf).sqrt()
                } else {
                    0.0
                };
                let gap = utilities
                    .iter()
                    .zip(&base_utilities)
                    .map(|(u, b)| (u - b) / b)
                    .sum::<f64>()
                    / kf;
                cells.push(DatasetCell {
                    alpha1,
                    k,
                    algorithm: alg.clone(),
                    mean_utility: mean,
                    std_error: se,
                    mean_x_noisy: x_noisy,
                    mean_x_other: x_other,
                    gap_vs_oblivious: gap,
                });
            }
        }
    }
    Ok(cells)
}

fn other_label(labels: &[String], label: &str) -> String {
    labels
        .iter()
        .find(|l| l.as_str() != label)
        .expect("two labels")
        .clone()
}

/// Target moments and raw shape of one synthetic group. `shape` lists
/// (weight, center, width) normal components of the pre-standardization
/// draw; the affine standardization below pins the final moments, so the
/// shape only controls skew and tail geometry.
#[derive(Debug, Clone)]
pub struct GroupMoments {
    pub label: String,
    pub count: usize,
    pub mean: f64,
    pub sd: f64,
    pub shape: Vec<(f64, f64, f64)>,
}

impl GroupMoments {
    /// A generic right-skewed two-component shape.
    pub fn right_skewed(label: &str, count: usize, mean: f64, sd: f64) -> Self {
        GroupMoments {
            label: label.into(),
            count,
            mean,
            sd,
            shape: vec![(0.8, -0.3, 0.8), (0.2, 1.2, 0.8)],
        }
    }
}

/// Generate a synthetic two-group score table whose per-group sample mean
/// and sample standard deviation (n−1 denominator) match the targets
/// exactly: a right-skewed normal mixture is drawn, then affinely
/// standardized within each group.
pub fn generate_synthetic_scores(groups: &[GroupMoments], seed: u64) -> Result<Vec<ScoreRecord>> {
    let mut out = Vec::new();
    for (g_idx, g) in groups.iter().enumerate() {
        if g.count < 2 {
            return Err(Error::Config(format!(
                "group '{}' needs at least two rows",
                g.label
            )));
        }
        if !(g.sd > 0.0) {
            return Err(Error::Config(format!(
                "group '{}' needs a positive target sd",
                g.label
            )));
        }
        let total_weight: f64 = g.shape.iter().map(|c| c.0).sum();
        if g.shape.is_empty() || (total_weight - 1.0).abs() > 1e-9 {
            return Err(Error::Config(format!(
                "group '{}' shape weights must sum to 1",
                g.label
            )));
        }
        let mut rng = ChaCha8Rng::seed_from_u64(replication_seed(seed, g_idx as u64));
        let unit = |bits: u64| ((bits >> 11) as f64 + 0.5) / (1u64 << 53) as f64;
        let mut raw: Vec<f64> = (0..g.count)
            .map(|_| {
                let pick = unit(rng.next_u64());
                let z = stdnorm::quantile(unit(rng.next_u64())).expect("u in (0,1)");
                let mut acc = 0.0;
                for &(w, center, width) in &g.shape {
                    acc += w;
                    if pick < acc {
                        return center + width * z;
                    }
                }
                let &(_, center, width) = g.shape.last().expect("non-empty shape");
                center + width * z
            })
            .collect();
        let n = raw.len() as f64;
        let mean = raw.iter().sum::<f64>() / n;
        let sd = (raw.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / (n - 1.0)).sqrt();
        for x in &mut raw {
            *x = g.mean + (*x - mean) / sd * g.sd;
        }
        out.extend(raw.into_iter().map(|score| ScoreRecord {
            group_label: g.label.clone(),
            score,
        }));
    }
    Ok(out)
}

/// The default synthetic fixture: two exam-score-like groups at one tenth of
/// the real cohort sizes with the reference per-group moments. The shapes
/// are right-skewed mixtures tuned so the selection experiments reproduce
/// the qualitative behavior of the real data: the majority group carries a
/// compact high-score block, the minority group a small extreme-performer
/// component.
pub fn exam_fixture_moments() -> Vec<GroupMoments> {
    vec![
        GroupMoments {
            label: "m".into(),
            count: 28_694,
            mean: 30.8,
            sd: 51.8,
            shape: vec![(0.85, -0.3, 0.5), (0.15, 1.55, 0.42)],
        },
        GroupMoments {
            label: "w".into(),
            count: 9_803,
            mean: 21.2,
            sd: 39.3,
            shape: vec![(0.89, -0.45, 0.42), (0.11, 4.5, 0.45)],
        },
    ]
}

/// One seeded noise draw per record: ŵ_i = score_i + σ(label_i)·ε_i, in row
/// order. Used for estimate histograms.
pub fn noisy_estimates(
    records: &[ScoreRecord],
    sigmas: &BTreeMap<String, f64>,
    seed: u64,
) -> Result<Vec<f64>> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    records
        .iter()
        .map(|r| {
            let sigma = sigmas.get(&r.group_label).ok_or_else(|| {
                Error::Config(format!("no noise scale for group '{}'", r.group_label))
            })?;
            let u = ((rng.next_u64() >> 11) as f64 + 0.5) / (1u64 << 53) as f64;
            Ok(r.score + sigma * stdnorm::quantile(u).expect("u in (0,1)"))
        })
        .collect()
}

/// Equal-width histogram over [min, max] of the values; returns bin edges
/// (len bins+1) and counts (len bins). The last bin is closed on the right.
pub fn histogram(values: &[f64], bins: usize) -> (Vec<f64>, Vec<usize>) {
    assert!(bins >= 1 && !values.is_empty());
    let min = values.iter().copied().fold(f64::INFINITY, f64::min);
    let max = values.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let width = if max > min { (max - min) / bins as f64 } else { 1.0 };
    let edges: Vec<f64> = (0..=bins).map(|i| min + i as f64 * width).collect();
    let mut counts = vec![0usize; bins];
    for &v in values {
        let idx = (((v - min) / width) as usize).min(bins - 1);
        counts[idx] += 1;
    }
    (edges, counts)
}
