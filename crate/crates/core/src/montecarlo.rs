//! Finite-population simulation of the one- and two-stage selection.
//!
//! Each replication samples a fresh population, runs the requested
//! first-stage rule exactly (quota counts, not thresholds), keeps the best
//! m₂ by true quality, and records the realized utility and per-group
//! selection fractions. Replications use SplitMix64-derived seeds feeding
//! ChaCha8 streams, so results are bit-reproducible for a fixed
//! configuration and identical populations are shared by all algorithms at
//! the same (seed, replication) — gaps between algorithms are therefore
//! paired comparisons with common random numbers.

use rand::RngCore;
use rand_chacha::rand_core::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::estimate::EstimateLaw;
use crate::model::{AlgorithmSpec, Budgets, Group, ModelParams};
use crate::stdnorm;

/// One simulated individual. `w_hat = w + σ_group·ε` with ε ~ N(0,1) drawn
/// at sampling time.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Candidate {
    pub group: Group,
    pub w: f64,
    pub w_hat: f64,
    pub index: u32,
}

#[derive(Debug, Clone)]
pub struct SimConfig {
    pub n: usize,
    pub params: ModelParams,
    pub budgets: Budgets,
    pub algorithm: AlgorithmSpec,
    pub replications: usize,
    pub seed: u64,
}

impl SimConfig {
    pub fn n_a(&self) -> usize {
        (self.params.p_a * self.n as f64).floor() as usize
    }

    pub fn m1(&self) -> usize {
        (self.budgets.alpha1() * self.n as f64).floor() as usize
    }

    pub fn m2(&self) -> usize {
        (self.budgets.alpha2() * self.n as f64).floor() as usize
    }

    pub fn validate(&self) -> Result<()> {
        let (n_a, m1, m2) = (self.n_a(), self.m1(), self.m2());
        if self.replications == 0 {
            return Err(Error::Config("need at least one replication".into()));
        }
        if !(1 <= m2 && m2 <= m1 && m1 <= self.n) {
            return Err(Error::Config(format!(
                "selection sizes must satisfy 1 <= m2 <= m1 <= n, got m1={m1}, m2={m2}, n={}",
                self.n
            )));
        }
        if n_a < 1 || self.n - n_a < 1 {
            return Err(Error::Config(format!(
                "both groups need at least one candidate, got n_a={n_a} of n={}",
                self.n
            )));
        }
        Ok(())
    }
}

/// Aggregated replication statistics.
#[derive(Debug, Clone, PartialEq)]
pub struct SimResult {
    /// Average over replications of (Σ selected w)/m₂.
    pub mean_utility: f64,
    /// Sample standard deviation of per-replication utility divided by √K.
    pub std_error: f64,
    pub mean_x_a: f64,
    pub mean_x_b: f64,
    pub utilities: Vec<f64>,
    /// True when any replication had to cap a group quota at the group size.
    pub quota_capped: bool,
}

/// SplitMix64 finalizer; decorrelates consecutive replication indices.
fn splitmix64(mut z: u64) -> u64 {
    z = z.wrapping_add(0x9e3779b97f4a7c15);
    z = (z ^ (z >> 30)).wrapping_mul(0xbf58476d1ce4e5b9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94d049bb133111eb);
    z ^ (z >> 31)
}

/// Deterministic per-replication seed derived from the master seed.
pub fn replication_seed(seed: u64, replication: u64) -> u64 {
    splitmix64(seed ^ splitmix64(replication.wrapping_add(1)))
}

/// Uniform in the open interval (0,1) from raw generator output.
fn unit_open(bits: u64) -> f64 {
    ((bits >> 11) as f64 + 0.5) * (1.0 / (1u64 << 53) as f64)
}

/// Draw a population of n candidates: ⌊p_A·n⌋ A-candidates first (stable
/// indices), qualities by inverse cdf, estimates W + σ_G·ε with ε by inverse
/// cdf as well, so one seed maps to one population on every platform.
pub fn sample_population(n: usize, params: &ModelParams, seed: u64) -> Result<Vec<Candidate>> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let n_a = (params.p_a * n as f64).floor() as usize;
    let mut out = Vec::with_capacity(n);
    for i in 0..n {
        let group = if i < n_a { Group::A } else { Group::B };
        let u_w = unit_open(rng.next_u64());
        let u_e = unit_open(rng.next_u64());
        let w = params.dist.quantile(u_w)?;
        let eps = stdnorm::quantile(u_e)?;
        out.push(Candidate {
            group,
            w,
            w_hat: w + params.sigma(group) * eps,
            index: i as u32,
        });
    }
    Ok(out)
}

#[derive(Debug, Clone)]
pub struct FirstStageSelection {
    pub selected: Vec<Candidate>,
    pub quota_capped: bool,
}

/// Run the first-stage rule, selecting exactly m₁ candidates.
///
/// The γ-rule reserves the best-estimated ⌈m₁·γ·n_A/(n_B+γ·n_A)⌉
/// A-candidates and ⌈m₁·γ·n_B/(n_A+γ·n_B)⌉ B-candidates, then fills the
/// remaining seats greedily by estimate across both groups. Demographic
/// parity is the γ = 1 case (quotas exact up to one candidate), group
/// oblivious is γ = 0 (plain top-m₁). `params` is required only by the
/// Bayesian-optimal rule, which ranks by posterior mean.
pub fn select_first_stage(
    candidates: &[Candidate],
    spec: &AlgorithmSpec,
    m1: usize,
    params: Option<&ModelParams>,
) -> Result<FirstStageSelection> {
    if m1 > candidates.len() {
        return Err(Error::Config(format!(
            "cannot select {m1} of {}",
            candidates.len()
        )));
    }
    match spec {
        AlgorithmSpec::GroupOblivious => Ok(FirstStageSelection {
            selected: top_by(candidates, m1, |c| c.w_hat),
            quota_capped: false,
        }),
        AlgorithmSpec::GammaRule(g) => select_with_quotas(candidates, m1, *g),
        AlgorithmSpec::DemographicParity => select_with_quotas(candidates, m1, 1.0),
        AlgorithmSpec::BayesianOptimal => {
            let params = params.ok_or_else(|| {
                Error::Config("bayesian-optimal selection needs the model parameters".into())
            })?;
            let law_a = EstimateLaw::new(params.dist.clone(), params.sigma(Group::A))?;
            let law_b = EstimateLaw::new(params.dist.clone(), params.sigma(Group::B))?;
            let mut scored: Vec<(f64, &Candidate)> = candidates
                .iter()
                .map(|c| {
                    let law = match c.group {
                        Group::A => &law_a,
                        Group::B => &law_b,
                    };
                    Ok((law.posterior_mean(c.w_hat)?, c))
                })
                .collect::<Result<_>>()?;
            scored.sort_by(|a, b| b.0.total_cmp(&a.0).then(a.1.index.cmp(&b.1.index)));
            let mut selected: Vec<Candidate> = scored[..m1].iter().map(|(_, c)| **c).collect();
            selected.sort_by_key(|c| c.index);
            Ok(FirstStageSelection {
                selected,
                quota_capped: false,
            })
        }
    }
}

fn top_by<K: Fn(&Candidate) -> f64>(candidates: &[Candidate], m: usize, key: K) -> Vec<Candidate> {
    let mut order: Vec<&Candidate> = candidates.iter().collect();
    order.sort_by(|a, b| key(b).total_cmp(&key(a)).then(a.index.cmp(&b.index)));
    let mut out: Vec<Candidate> = order[..m].iter().map(|c| **c).collect();
    out.sort_by_key(|c| c.index);
    out
}

fn select_with_quotas(candidates: &[Candidate], m1: usize, gamma: f64) -> Result<FirstStageSelection> {
    if !(0.0..=1.0).contains(&gamma) {
        return Err(Error::Domain(format!("gamma must be in [0,1], got {gamma}")));
    }
    let mut by_group: [Vec<&Candidate>; 2] = [Vec::new(), Vec::new()];
    for c in candidates {
        by_group[match c.group {
            Group::A => 0,
            Group::B => 1,
        }]
        .push(c);
    }
    for g in &mut by_group {
        g.sort_by(|a, b| b.w_hat.total_cmp(&a.w_hat).then(a.index.cmp(&b.index)));
    }
    let n_a = by_group[0].len();
    let n_b = by_group[1].len();

    let quota = |n_own: usize, n_other: usize| -> usize {
        if gamma == 0.0 || n_own == 0 {
            return 0;
        }
        if gamma == 1.0 {
            // integer ceiling, exact for the demographic-parity case
            return (m1 * n_own).div_ceil(n_own + n_other);
        }
        let raw = m1 as f64 * gamma * n_own as f64 / (n_other as f64 + gamma * n_own as f64);
        (raw - 1e-9).ceil() as usize
    };
    let mut q = [quota(n_a, n_b), quota(n_b, n_a)];
    let mut capped = false;
    if q[0] > n_a {
        q[0] = n_a;
        capped = true;
    }
    if q[1] > n_b {
        q[1] = n_b;
        capped = true;
    }
    // ceilings can overshoot the budget by one: drop the weakest marginal pick
    while q[0] + q[1] > m1 {
        let worst_a = q[0].checked_sub(1).map(|i| by_group[0][i]);
        let worst_b = q[1].checked_sub(1).map(|i| by_group[1][i]);
        match (worst_a, worst_b) {
            (Some(a), Some(b)) => {
                let drop_a = match a.w_hat.total_cmp(&b.w_hat) {
                    std::cmp::Ordering::Less => true,
                    std::cmp::Ordering::Greater => false,
                    std::cmp::Ordering::Equal => a.index > b.index,
                };
                if drop_a {
                    q[0] -= 1;
                } else {
                    q[1] -= 1;
                }
            }
            (Some(_), None) => q[0] -= 1,
            (None, Some(_)) => q[1] -= 1,
            (None, None) => break,
        }
    }

    let mut selected: Vec<Candidate> = Vec::with_capacity(m1);
    selected.extend(by_group[0][..q[0]].iter().map(|c| **c));
    selected.extend(by_group[1][..q[1]].iter().map(|c| **c));
    // fill remaining seats greedily across both groups
    let mut rest: Vec<&Candidate> = by_group[0][q[0]..]
        .iter()
        .chain(by_group[1][q[1]..].iter())
        .copied()
        .collect();
    rest.sort_by(|a, b| b.w_hat.total_cmp(&a.w_hat).then(a.index.cmp(&b.index)));
    selected.extend(rest[..m1 - q[0] - q[1]].iter().map(|c| **c));
    selected.sort_by_key(|c| c.index);
    Ok(FirstStageSelection {
        selected,
        quota_capped: capped,
    })
}

/// Keep the m₂ candidates with the largest true quality; ties go to the
/// lower index.
pub fn select_second_stage(selected: &[Candidate], m2: usize) -> Result<Vec<Candidate>> {
    if m2 > selected.len() {
        return Err(Error::Config(format!(
            "cannot keep {m2} of {}",
            selected.len()
        )));
    }
    Ok(top_by(selected, m2, |c| c.w))
}

/// Run all replications of a configuration and aggregate.
pub fn run_replications(config: &SimConfig) -> Result<SimResult> {
    config.validate()?;
    let (n_a, m1, m2) = (config.n_a(), config.m1(), config.m2());
    let n_b = config.n - n_a;
    let per_rep: Vec<(f64, f64, f64, bool)> = (0..config.replications)
        .into_par_iter()
        .map(|rep| -> Result<(f64, f64, f64, bool)> {
            let pop = sample_population(
                config.n,
                &config.params,
                replication_seed(config.seed, rep as u64),
            )?;
            let first = select_first_stage(&pop, &config.algorithm, m1, Some(&config.params))?;
            let final_sel = select_second_stage(&first.selected, m2)?;
            let utility = final_sel.iter().map(|c| c.w).sum::<f64>() / m2 as f64;
            let sel_a = first
                .selected
                .iter()
                .filter(|c| c.group == Group::A)
                .count();
            Ok((
                utility,
                sel_a as f64 / n_a as f64,
                (first.selected.len() - sel_a) as f64 / n_b as f64,
                first.quota_capped,
            ))
        })
        .collect::<Result<_>>()?;

    let k = per_rep.len() as f64;
    let utilities: Vec<f64> = per_rep.iter().map(|r| r.0).collect();
    let mean_utility = utilities.iter().sum::<f64>() / k;
    let std_error = if per_rep.len() > 1 {
        let var = utilities
            .iter()
            .map(|u| (u - mean_utility).powi(2))
            .sum::<f64>()
            / (k - 1.0);
        (var / k).sqrt()
    } else {
        0.0
    };
    Ok(SimResult {
        mean_utility,
        std_error,
        mean_x_a: per_rep.iter().map(|r| r.1).sum::<f64>() / k,
        mean_x_b: per_rep.iter().map(|r| r.2).sum::<f64>() / k,
        utilities,
        quota_capped: per_rep.iter().any(|r| r.3),
    })
}

/// Mean and standard error of the per-replication relative gap
/// (u_alg − u_base)/u_base. Meaningful when both results come from the same
/// seed, which pairs them on identical populations.
pub fn pairwise_gap(alg: &SimResult, base: &SimResult) -> (f64, f64) {
    assert_eq!(
        alg.utilities.len(),
        base.utilities.len(),
        "gap needs paired replications"
    );
    let gaps: Vec<f64> = alg
        .utilities
        .iter()
        .zip(&base.utilities)
        .map(|(a, b)| (a - b) / b)
        .collect();
    let k = gaps.len() as f64;
    let mean = gaps.iter().sum::<f64>() / k;
    let se = if gaps.len() > 1 {
        let var = gaps.iter().map(|g| (g - mean).powi(2)).sum::<f64>() / (k - 1.0);
        (var / k).sqrt()
    } else {
        0.0
    };
    (mean, se)
}
