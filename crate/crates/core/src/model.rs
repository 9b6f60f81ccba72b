//! Shared domain types: groups, noise scales, budgets, thresholds,
//! algorithms and selection outcomes.

use crate::dist::QualityDistribution;
use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Group {
    A,
    B,
}

impl Group {
    pub fn other(self) -> Self {
        match self {
            Group::A => Group::B,
            Group::B => Group::A,
        }
    }
}

/// Per-group noise scales of the quality estimate Ŵ = W + σ_G·ε.
///
/// Convention: group A is the high(er)-variance group, σ_A ≥ σ_B ≥ 0.
/// Callers with the opposite ordering swap the labels.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GroupNoise {
    sigma_a: f64,
    sigma_b: f64,
}

impl GroupNoise {
    pub fn new(sigma_a: f64, sigma_b: f64) -> Result<Self> {
        if !(sigma_a.is_finite() && sigma_b.is_finite() && sigma_b >= 0.0 && sigma_a >= sigma_b) {
            return Err(Error::Domain(format!(
                "noise scales must satisfy sigma_a >= sigma_b >= 0, got ({sigma_a}, {sigma_b})"
            )));
        }
        Ok(Self { sigma_a, sigma_b })
    }

    pub fn sigma(&self, g: Group) -> f64 {
        match g {
            Group::A => self.sigma_a,
            Group::B => self.sigma_b,
        }
    }
}

/// Population parameters: group share, quality distribution, noise scales.
#[derive(Debug, Clone, PartialEq)]
pub struct ModelParams {
    pub p_a: f64,
    pub dist: QualityDistribution,
    pub noise: GroupNoise,
}

impl ModelParams {
    pub fn new(p_a: f64, dist: QualityDistribution, noise: GroupNoise) -> Result<Self> {
        if !(p_a > 0.0 && p_a < 1.0) {
            return Err(Error::Domain(format!(
                "group share must satisfy 0 < p_a < 1, got {p_a}"
            )));
        }
        Ok(Self { p_a, dist, noise })
    }

    pub fn share(&self, g: Group) -> f64 {
        match g {
            Group::A => self.p_a,
            Group::B => 1.0 - self.p_a,
        }
    }

    pub fn sigma(&self, g: Group) -> f64 {
        self.noise.sigma(g)
    }
}

/// Stage budgets: fractions of the population kept after stage one and two.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Budgets {
    alpha1: f64,
    alpha2: f64,
}

impl Budgets {
    pub fn new(alpha1: f64, alpha2: f64) -> Result<Self> {
        if !(alpha2 > 0.0 && alpha2 <= alpha1 && alpha1 <= 1.0) {
            return Err(Error::Domain(format!(
                "budgets must satisfy 0 < alpha2 <= alpha1 <= 1, got ({alpha1}, {alpha2})"
            )));
        }
        Ok(Self { alpha1, alpha2 })
    }

    /// Single-stage selection: everyone kept at stage one is final.
    pub fn one_stage(alpha1: f64) -> Result<Self> {
        Self::new(alpha1, alpha1)
    }

    pub fn alpha1(&self) -> f64 {
        self.alpha1
    }

    pub fn alpha2(&self) -> f64 {
        self.alpha2
    }

    pub fn is_one_stage(&self) -> bool {
        self.alpha1 == self.alpha2
    }
}

/// Posterior distribution parameters of W given Ŵ = ŵ under the normal
/// model: W | Ŵ=ŵ ~ N(mean, sd²).
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PosteriorParams {
    pub mean: f64,
    pub sd: f64,
}

/// Shrinkage posterior mean E[W | Ŵ = ŵ] for W ~ N(μ_W, σ_W²) and
/// Ŵ = W + σ_G·ε. Returns ŵ itself when the estimate is noiseless and
/// tends to μ_W as σ_G → ∞.
pub fn posterior_mean(w_hat: f64, sigma_g: f64, mu_w: f64, sd_w: f64) -> f64 {
    if sigma_g == 0.0 {
        return w_hat;
    }
    let lambda = sd_w * sd_w / (sigma_g * sigma_g + sd_w * sd_w);
    lambda * w_hat + (1.0 - lambda) * mu_w
}

/// Full posterior parameters of W given Ŵ = ŵ under the normal model.
pub fn posterior_params(w_hat: f64, sigma_g: f64, mu_w: f64, sd_w: f64) -> PosteriorParams {
    PosteriorParams {
        mean: posterior_mean(w_hat, sigma_g, mu_w, sd_w),
        sd: sigma_g * sd_w / (sigma_g * sigma_g + sd_w * sd_w).sqrt(),
    }
}

/// First-stage selection rule.
#[derive(Debug, Clone, PartialEq)]
pub enum AlgorithmSpec {
    /// Rank everyone by Ŵ with a single common threshold.
    GroupOblivious,
    /// Group-oblivious corrected onto the boundary of the region
    /// x_A ≥ γ·x_B and x_B ≥ γ·x_A. γ = 0.8 is the four-fifths rule.
    GammaRule(f64),
    /// Equal selection rates, x_A = x_B.
    DemographicParity,
    /// Knows all model parameters and maximizes expected final quality.
    BayesianOptimal,
}

impl AlgorithmSpec {
    pub fn gamma_rule(gamma: f64) -> Result<Self> {
        if !(0.0..=1.0).contains(&gamma) {
            return Err(Error::Domain(format!("gamma must be in [0,1], got {gamma}")));
        }
        Ok(Self::GammaRule(gamma))
    }

    pub fn label(&self) -> String {
        match self {
            Self::GroupOblivious => "group-oblivious".into(),
            Self::GammaRule(g) => format!("gamma-{g}"),
            Self::DemographicParity => "demographic-parity".into(),
            Self::BayesianOptimal => "bayesian-optimal".into(),
        }
    }
}

/// The threshold triple describing a selection: pass stage one if
/// Ŵ ≥ first_g, pass stage two if additionally W ≥ second.
///
/// `f64::NEG_INFINITY` is the sentinel for "no cut at this threshold"
/// (everyone passes); all consumers branch on it explicitly rather than
/// doing arithmetic with it. An empty-group flag marks fractions of zero,
/// where the stored threshold is the 1−1e−12 quantile of the group's
/// estimate distribution rather than +∞.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Thresholds {
    pub first_a: f64,
    pub first_b: f64,
    pub second: f64,
    pub empty_a: bool,
    pub empty_b: bool,
}

impl Thresholds {
    pub fn first(&self, g: Group) -> f64 {
        match g {
            Group::A => self.first_a,
            Group::B => self.first_b,
        }
    }
}

/// Per-group selection fractions, thresholds and expected utility of a
/// threshold-type selection.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SelectionOutcome {
    /// First-stage fraction of A-candidates selected.
    pub x_a: f64,
    pub x_b: f64,
    /// Final (after stage two) fraction of A-candidates selected.
    pub y_a: f64,
    pub y_b: f64,
    pub thresholds: Thresholds,
    /// Expected quality of a finally selected candidate.
    pub utility: f64,
}

impl SelectionOutcome {
    pub fn x(&self, g: Group) -> f64 {
        match g {
            Group::A => self.x_a,
            Group::B => self.x_b,
        }
    }

    pub fn y(&self, g: Group) -> f64 {
        match g {
            Group::A => self.y_a,
            Group::B => self.y_b,
        }
    }
}
