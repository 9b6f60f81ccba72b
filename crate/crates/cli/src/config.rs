//! Configuration files and flag overrides.
//!
//! Configs are JSON; every field has a default, command-line flags win over
//! file values, and validation collects every problem before reporting them
//! in one aggregated error.

use fairsel_core::dist::{MixtureComponent, QualityDistribution};
use fairsel_core::model::{AlgorithmSpec, Budgets, GroupNoise, ModelParams};
use serde::Deserialize;

#[derive(Debug, Clone, Deserialize)]
#[serde(tag = "type", rename_all = "kebab-case")]
pub enum DistSpec {
    Normal { mean: f64, sd: f64 },
    Pareto { scale: f64, shape: f64 },
    Uniform { lo: f64, hi: f64 },
    Mixture { components: Vec<ComponentSpec> },
    Beta { alpha: f64, beta: f64, loc: f64, scale: f64 },
}

#[derive(Debug, Clone, Deserialize)]
pub struct ComponentSpec {
    pub weight: f64,
    pub mean: f64,
    pub sd: f64,
}

impl DistSpec {
    pub fn build(&self) -> Result<QualityDistribution, String> {
        let made = match self {
            DistSpec::Normal { mean, sd } => QualityDistribution::normal(*mean, *sd),
            DistSpec::Pareto { scale, shape } => QualityDistribution::pareto(*scale, *shape),
            DistSpec::Uniform { lo, hi } => QualityDistribution::uniform(*lo, *hi),
            DistSpec::Mixture { components } => QualityDistribution::mixture(
                components
                    .iter()
                    .map(|c| MixtureComponent {
                        weight: c.weight,
                        mean: c.mean,
                        sd: c.sd,
                    })
                    .collect(),
            ),
            DistSpec::Beta { alpha, beta, loc, scale } => {
                QualityDistribution::beta(*alpha, *beta, *loc, *scale)
            }
        };
        made.map_err(|e| e.to_string())
    }
}

impl Default for DistSpec {
    fn default() -> Self {
        DistSpec::Normal { mean: 1.0, sd: 1.0 }
    }
}

#[derive(Debug, Clone, Deserialize)]
#[serde(default)]
pub struct ModelSpec {
    pub p_a: f64,
    pub sigma_a: f64,
    pub sigma_b: f64,
    pub dist: DistSpec,
}

impl Default for ModelSpec {
    fn default() -> Self {
        Self {
            p_a: 0.4,
            sigma_a: 3.0,
            sigma_b: 0.2,
            dist: DistSpec::default(),
        }
    }
}

impl ModelSpec {
    pub fn build(&self, issues: &mut Vec<String>) -> Option<ModelParams> {
        let dist = match self.dist.build() {
            Ok(d) => Some(d),
            Err(e) => {
                issues.push(format!("dist: {e}"));
                None
            }
        };
        let noise = match GroupNoise::new(self.sigma_a, self.sigma_b) {
            Ok(n) => Some(n),
            Err(e) => {
                issues.push(e.to_string());
                None
            }
        };
        match (dist, noise) {
            (Some(d), Some(n)) => match ModelParams::new(self.p_a, d, n) {
                Ok(p) => Some(p),
                Err(e) => {
                    issues.push(e.to_string());
                    None
                }
            },
            _ => None,
        }
    }
}

/// Inclusive linear grid.
#[derive(Debug, Clone, Deserialize)]
pub struct GridSpec {
    pub start: f64,
    pub stop: f64,
    pub count: usize,
}

impl GridSpec {
    pub fn single(v: f64) -> Self {
        Self { start: v, stop: v, count: 1 }
    }

    pub fn values(&self) -> Vec<f64> {
        if self.count <= 1 {
            return vec![self.start];
        }
        (0..self.count)
            .map(|i| self.start + (self.stop - self.start) * i as f64 / (self.count - 1) as f64)
            .collect()
    }

    /// Parse "start:stop:count" or a single number.
    pub fn parse(text: &str) -> Result<Self, String> {
        let parts: Vec<&str> = text.split(':').collect();
        match parts.as_slice() {
            [v] => v
                .parse::<f64>()
                .map(GridSpec::single)
                .map_err(|_| format!("bad grid value '{text}'")),
            [a, b, c] => {
                let start = a.parse::<f64>().map_err(|_| format!("bad grid start '{a}'"))?;
                let stop = b.parse::<f64>().map_err(|_| format!("bad grid stop '{b}'"))?;
                let count = c.parse::<usize>().map_err(|_| format!("bad grid count '{c}'"))?;
                if count == 0 {
                    return Err("grid count must be at least 1".into());
                }
                Ok(GridSpec { start, stop, count })
            }
            _ => Err(format!("grid must be 'value' or 'start:stop:count', got '{text}'")),
        }
    }
}

/// Parse an algorithm list entry: "group-oblivious", "demographic-parity",
/// "bayesian-optimal" or "gamma:<value>".
pub fn parse_algorithm(text: &str) -> Result<AlgorithmSpec, String> {
    match text {
        "group-oblivious" => Ok(AlgorithmSpec::GroupOblivious),
        "demographic-parity" => Ok(AlgorithmSpec::DemographicParity),
        "bayesian-optimal" => Ok(AlgorithmSpec::BayesianOptimal),
        other => {
            if let Some(g) = other.strip_prefix("gamma:") {
                let gamma: f64 = g.parse().map_err(|_| format!("bad gamma value '{g}'"))?;
                AlgorithmSpec::gamma_rule(gamma).map_err(|e| e.to_string())
            } else {
                Err(format!(
                    "unknown algorithm '{other}' (expected group-oblivious, gamma:<g>, \
                     demographic-parity or bayesian-optimal)"
                ))
            }
        }
    }
}

pub fn parse_algorithms(items: &[String], issues: &mut Vec<String>) -> Vec<AlgorithmSpec> {
    let mut out = Vec::new();
    for item in items {
        match parse_algorithm(item) {
            Ok(a) => out.push(a),
            Err(e) => issues.push(e),
        }
    }
    out
}

pub fn build_budgets(alpha1: f64, alpha2: Option<f64>, issues: &mut Vec<String>) -> Option<Budgets> {
    let result = match alpha2 {
        Some(a2) => Budgets::new(alpha1, a2),
        None => Budgets::one_stage(alpha1),
    };
    match result {
        Ok(b) => Some(b),
        Err(e) => {
            issues.push(e.to_string());
            None
        }
    }
}

pub fn default_algorithms() -> Vec<String> {
    vec![
        "group-oblivious".into(),
        "gamma:0.8".into(),
        "demographic-parity".into(),
        "bayesian-optimal".into(),
    ]
}

pub fn load_json<T: for<'de> Deserialize<'de>>(path: &std::path::Path) -> anyhow::Result<T> {
    let text = std::fs::read_to_string(path)
        .map_err(|e| anyhow::anyhow!("cannot read config {}: {e}", path.display()))?;
    serde_json::from_str(&text)
        .map_err(|e| anyhow::anyhow!("cannot parse config {}: {e}", path.display()))
}
