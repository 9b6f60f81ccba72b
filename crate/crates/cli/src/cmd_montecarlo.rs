//! `montecarlo`: finite-population sweep over the stage-one budget grid.
//! Populations are shared by every algorithm and grid point at the same
//! (seed, replication), so gap columns are paired comparisons.

use anyhow::{anyhow, bail};
use fairsel_core::model::AlgorithmSpec;
use fairsel_core::montecarlo::{pairwise_gap, run_replications, SimConfig};
use serde::Deserialize;

use crate::config::{self, GridSpec, ModelSpec};
use crate::output::{self, Sink};
use crate::MonteCarloArgs;

#[derive(Debug, Deserialize)]
#[serde(default)]
struct MonteCarloConfig {
    model: ModelSpec,
    n: usize,
    alpha1: Option<GridSpec>,
    alpha2: Option<f64>,
    replications: usize,
    seed: u64,
    algorithms: Option<Vec<String>>,
}

impl Default for MonteCarloConfig {
    fn default() -> Self {
        Self {
            model: ModelSpec::default(),
            n: 100,
            alpha1: None,
            alpha2: None,
            replications: 1000,
            seed: 0,
            algorithms: None,
        }
    }
}

pub fn run(args: MonteCarloArgs) -> anyhow::Result<u8> {
    let mut cfg: MonteCarloConfig = match &args.config {
        Some(path) => config::load_json(path)?,
        None => MonteCarloConfig::default(),
    };
    if let Some(v) = args.p_a {
        cfg.model.p_a = v;
    }
    if let Some(v) = args.sigma_a {
        cfg.model.sigma_a = v;
    }
    if let Some(v) = args.sigma_b {
        cfg.model.sigma_b = v;
    }
    if let Some(v) = args.n {
        cfg.n = v;
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
    let params = cfg.model.build(&mut issues);
    let algorithms = config::parse_algorithms(
        &cfg.algorithms.clone().unwrap_or_else(|| {
            vec!["group-oblivious".into(), "demographic-parity".into()]
        }),
        &mut issues,
    );
    let grid = cfg
        .alpha1
        .clone()
        .unwrap_or(GridSpec { start: 0.1, stop: 1.0, count: 10 });
    if cfg.replications == 0 {
        issues.push("need at least one replication".into());
    }
    if !issues.is_empty() {
        bail!("invalid configuration:\n  - {}", issues.join("\n  - "));
    }
    let params = params.expect("validated above");

    let sink = Sink::from_flag(&args.out);
    let mut w = sink.writer()?;
    output::write_row(
        &mut *w,
        &[
            "n".into(),
            "m1".into(),
            "algorithm".into(),
            "mean_utility".into(),
            "std_error".into(),
            "mean_x_a".into(),
            "gap_vs_oblivious_mean".into(),
            "gap_vs_oblivious_std_error".into(),
        ],
    )?;

    for alpha1 in grid.values() {
        let budgets = {
            let mut issues = Vec::new();
            config::build_budgets(alpha1, cfg.alpha2, &mut issues)
                .ok_or_else(|| anyhow!("alpha1 = {alpha1}: {}", issues.join("; ")))?
        };
        let sim = |algorithm: AlgorithmSpec| SimConfig {
            n: cfg.n,
            params: params.clone(),
            budgets,
            algorithm,
            replications: cfg.replications,
            seed: cfg.seed,
        };
        let baseline = run_replications(&sim(AlgorithmSpec::GroupOblivious))
            .map_err(|e| anyhow!("alpha1 = {alpha1}: {e}"))?;
        let m1 = sim(AlgorithmSpec::GroupOblivious).m1();
        for alg in &algorithms {
            let result = if *alg == AlgorithmSpec::GroupOblivious {
                baseline.clone()
            } else {
                run_replications(&sim(alg.clone()))
                    .map_err(|e| anyhow!("alpha1 = {alpha1}, {}: {e}", alg.label()))?
            };
            let (gap_mean, gap_se) = pairwise_gap(&result, &baseline);
            output::write_row(
                &mut *w,
                &[
                    cfg.n.to_string(),
                    m1.to_string(),
                    alg.label(),
                    output::num(result.mean_utility),
                    output::num(result.std_error),
                    output::num(result.mean_x_a),
                    output::num(gap_mean),
                    output::num(gap_se),
                ],
            )?;
        }
    }
    Ok(0)
}
