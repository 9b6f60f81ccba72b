//! `asymptotic-curve`: one CSV row per (α₁, algorithm) with fractions,
//! final-stage fractions, utility and the gap against group-oblivious.

use anyhow::{anyhow, bail};
use fairsel_core::asymptotic::Asymptotic;
use fairsel_core::model::AlgorithmSpec;
use rayon::prelude::*;
use serde::Deserialize;

use crate::config::{self, GridSpec, ModelSpec};
use crate::output::{self, Sink};
use crate::CurveArgs;

#[derive(Debug, Default, Deserialize)]
#[serde(default)]
struct CurveConfig {
    model: ModelSpec,
    alpha1: Option<GridSpec>,
    alpha2: Option<f64>,
    algorithms: Option<Vec<String>>,
}

pub fn run(args: CurveArgs) -> anyhow::Result<u8> {
    let mut cfg: CurveConfig = match &args.config {
        Some(path) => config::load_json(path)?,
        None => CurveConfig::default(),
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
    if args.alpha1.is_some() {
        cfg.alpha1 = args.alpha1.clone();
    }
    if args.alpha2.is_some() {
        cfg.alpha2 = args.alpha2;
    }
    if args.algorithms.is_some() {
        cfg.algorithms = args.algorithms.clone();
    }

    let mut issues = Vec::new();
    let params = cfg.model.build(&mut issues);
    let algorithms = config::parse_algorithms(
        &cfg.algorithms.clone().unwrap_or_else(config::default_algorithms),
        &mut issues,
    );
    let grid = cfg
        .alpha1
        .clone()
        .unwrap_or(GridSpec { start: 0.05, stop: 0.95, count: 19 });
    let alpha1s = grid.values();
    if alpha1s.is_empty() {
        issues.push("alpha1 grid is empty".into());
    }
    for &a1 in &alpha1s {
        if !(a1 > 0.0 && a1 <= 1.0) {
            issues.push(format!("alpha1 = {a1} outside (0,1]"));
        }
        if let Some(a2) = cfg.alpha2 {
            if !(a2 > 0.0 && a2 <= a1) {
                issues.push(format!("alpha2 = {a2} incompatible with alpha1 = {a1}"));
            }
        }
    }
    if !issues.is_empty() {
        bail!("invalid configuration:\n  - {}", issues.join("\n  - "));
    }
    let params = params.expect("validated above");
    let model = Asymptotic::new(params).map_err(|e| anyhow!("{e}"))?;

    // grid points are independent; evaluate them in parallel, emit in order
    let rows: Vec<Vec<Vec<String>>> = alpha1s
        .par_iter()
        .map(|&alpha1| -> anyhow::Result<Vec<Vec<String>>> {
            let mut issues = Vec::new();
            let budgets = config::build_budgets(alpha1, cfg.alpha2, &mut issues)
                .ok_or_else(|| anyhow!("alpha1 = {alpha1}: {}", issues.join("; ")))?;
            let baseline = model
                .run(&AlgorithmSpec::GroupOblivious, &budgets)
                .map_err(|e| anyhow!("alpha1 = {alpha1}: {e}"))?;
            algorithms
                .iter()
                .map(|alg| {
                    let out = if *alg == AlgorithmSpec::GroupOblivious {
                        baseline
                    } else {
                        model
                            .run(alg, &budgets)
                            .map_err(|e| anyhow!("alpha1 = {alpha1}, {}: {e}", alg.label()))?
                    };
                    let gap = (out.utility - baseline.utility) / baseline.utility;
                    Ok(vec![
                        output::num(alpha1),
                        alg.label(),
                        output::num(out.x_a),
                        output::num(out.x_b),
                        output::num(out.y_a),
                        output::num(out.y_b),
                        output::num(out.utility),
                        output::num(gap),
                    ])
                })
                .collect()
        })
        .collect::<anyhow::Result<_>>()?;

    let sink = Sink::from_flag(&args.out);
    let mut w = sink.writer()?;
    output::write_row(
        &mut *w,
        &[
            "alpha1".into(),
            "algorithm".into(),
            "x_a".into(),
            "x_b".into(),
            "y_a".into(),
            "y_b".into(),
            "utility".into(),
            "gap_vs_oblivious".into(),
        ],
    )?;
    for point in rows {
        for row in point {
            output::write_row(&mut *w, &row)?;
        }
    }
    Ok(0)
}
