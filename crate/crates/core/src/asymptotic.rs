//! The infinite-population selection model.
//!
//! A threshold-type selection is fully described by (θ̂_A, θ̂_B, θ): pass
//! stage one if Ŵ ≥ θ̂_G, pass stage two if additionally W ≥ θ. Given the
//! first-stage fraction x_A of selected A-candidates, the thresholds are
//! pinned by the budget constraints
//!
//! ```text
//!   P(Ŵ ≥ θ̂_A | A) = x_A
//!   Σ_G p_G·P(Ŵ ≥ θ̂_G | G) = α₁
//!   Σ_G p_G·P(Ŵ ≥ θ̂_G, W ≥ θ | G) = α₂
//! ```
//!
//! and the expected utility of the selection is
//! Q(x_A) = Σ_G p_G·E[W·1{Ŵ≥θ̂_G, W≥θ} | G] / α₂. Q is strictly concave in
//! x_A, so the Bayesian-optimal fraction is the root of its derivative,
//! which has the closed per-group factors implemented in
//! [`EstimateLaw::posterior_mean`] (one stage) and [`EstimateLaw::uplift`]
//! (two stages).

use crate::error::{Error, Result};
use crate::estimate::{EstimateLaw, NumericOptions};
use crate::model::{AlgorithmSpec, Budgets, Group, ModelParams, SelectionOutcome, Thresholds};
use crate::roots::{self, RootOptions};

/// Fractions below this are treated as an empty group selection: the stored
/// threshold is the 1−1e−12 estimate quantile and the empty flag is set.
const EMPTY_FRACTION: f64 = 1e-12;

/// The n = ∞ engine for a fixed population model.
#[derive(Debug, Clone)]
pub struct Asymptotic {
    params: ModelParams,
    law_a: EstimateLaw,
    law_b: EstimateLaw,
    opts: NumericOptions,
}

/// First-stage solution: fractions, thresholds, empty-group flags.
#[derive(Debug, Clone, Copy)]
pub struct FirstStage {
    pub x_a: f64,
    pub x_b: f64,
    pub th_a: f64,
    pub th_b: f64,
    pub empty_a: bool,
    pub empty_b: bool,
}

impl Asymptotic {
    pub fn new(params: ModelParams) -> Result<Self> {
        Self::with_options(params, NumericOptions::default())
    }

    pub fn with_options(params: ModelParams, opts: NumericOptions) -> Result<Self> {
        let law_a = EstimateLaw::with_options(params.dist.clone(), params.sigma(Group::A), opts)?;
        let law_b = EstimateLaw::with_options(params.dist.clone(), params.sigma(Group::B), opts)?;
        Ok(Self {
            params,
            law_a,
            law_b,
            opts,
        })
    }

    pub fn params(&self) -> &ModelParams {
        &self.params
    }

    pub fn law(&self, g: Group) -> &EstimateLaw {
        match g {
            Group::A => &self.law_a,
            Group::B => &self.law_b,
        }
    }

    /// Range of x_A compatible with the stage-one budget and a valid x_B.
    pub fn feasible_interval(&self, alpha1: f64) -> (f64, f64) {
        let p_a = self.params.p_a;
        let p_b = 1.0 - p_a;
        let lo = ((alpha1 - p_b) / p_a).max(0.0);
        let hi = (alpha1 / p_a).min(1.0);
        (lo, hi)
    }

    /// Solve the stage-one thresholds for a given x_A.
    pub fn first_stage(&self, x_a: f64, alpha1: f64) -> Result<FirstStage> {
        let (lo, hi) = self.feasible_interval(alpha1);
        if !(x_a >= lo - 1e-12 && x_a <= hi + 1e-12) {
            return Err(Error::Domain(format!(
                "x_a = {x_a} outside the feasible interval [{lo}, {hi}] for alpha1 = {alpha1}"
            )));
        }
        let x_a = x_a.clamp(lo, hi);
        let p_a = self.params.p_a;
        let p_b = 1.0 - p_a;
        let x_b = ((alpha1 - p_a * x_a) / p_b).clamp(0.0, 1.0);
        let (th_a, empty_a) = self.threshold_for_fraction(Group::A, x_a)?;
        let (th_b, empty_b) = self.threshold_for_fraction(Group::B, x_b)?;
        Ok(FirstStage {
            x_a,
            x_b,
            th_a,
            th_b,
            empty_a,
            empty_b,
        })
    }

    fn threshold_for_fraction(&self, g: Group, x: f64) -> Result<(f64, bool)> {
        let law = self.law(g);
        if x >= 1.0 - EMPTY_FRACTION {
            return Ok((f64::NEG_INFINITY, false));
        }
        if x <= EMPTY_FRACTION {
            return Ok((law.upper_quantile(EMPTY_FRACTION)?, true));
        }
        Ok((law.upper_quantile(x)?, false))
    }

    /// Solve the stage-two threshold θ. Returns the −∞ sentinel when the
    /// budgets collapse to one stage.
    pub fn second_stage(&self, fs: &FirstStage, budgets: &Budgets) -> Result<f64> {
        if budgets.is_one_stage() {
            return Ok(f64::NEG_INFINITY);
        }
        let p_a = self.params.p_a;
        let p_b = 1.0 - p_a;
        let achieved = p_a * fs.x_a + p_b * fs.x_b;
        let alpha2 = budgets.alpha2();
        if alpha2 > achieved + 1e-9 {
            return Err(Error::Infeasible(format!(
                "stage-two budget {alpha2} exceeds the stage-one mass {achieved}"
            )));
        }
        let (w_lo, w_hi) = self.params.dist.support();
        roots::solve_bracketed(
            |th| {
                let ya = self.law_a.joint_tail(fs.th_a, th)?;
                let yb = self.law_b.joint_tail(fs.th_b, th)?;
                Ok(p_a * ya + p_b * yb - alpha2)
            },
            w_lo,
            w_hi,
            &self.opts.root,
        )
    }

    /// Expected utility and selection fractions of the threshold-type
    /// selection with stage-one fraction x_A.
    pub fn utility(&self, x_a: f64, budgets: &Budgets) -> Result<SelectionOutcome> {
        let fs = self.first_stage(x_a, budgets.alpha1())?;
        let th = self.second_stage(&fs, budgets)?;
        let (y_a, y_b) = if th == f64::NEG_INFINITY {
            (fs.x_a, fs.x_b)
        } else {
            (
                self.law_a.joint_tail(fs.th_a, th)?,
                self.law_b.joint_tail(fs.th_b, th)?,
            )
        };
        let mass_a = self.law_a.quality_mass(fs.th_a, th)?;
        let mass_b = self.law_b.quality_mass(fs.th_b, th)?;
        let p_a = self.params.p_a;
        let utility = (p_a * mass_a + (1.0 - p_a) * mass_b) / budgets.alpha2();
        Ok(SelectionOutcome {
            x_a: fs.x_a,
            x_b: fs.x_b,
            y_a,
            y_b,
            thresholds: Thresholds {
                first_a: fs.th_a,
                first_b: fs.th_b,
                second: th,
                empty_a: fs.empty_a,
                empty_b: fs.empty_b,
            },
            utility,
        })
    }

    /// dQ/dx_A at an interior x_A. One stage: (p_A/α₁)·(m_A(θ̂_A) − m_B(θ̂_B))
    /// with m_G the posterior mean at the marginal estimate. Two stages:
    /// (p_A/α₂)·(r_A(θ̂_A,θ) − r_B(θ̂_B,θ)) with r_G = E[(W−θ)⁺ | Ŵ=θ̂_G].
    pub fn utility_derivative(&self, x_a: f64, budgets: &Budgets) -> Result<f64> {
        let fs = self.first_stage(x_a, budgets.alpha1())?;
        if fs.empty_a || fs.empty_b || fs.x_a >= 1.0 - EMPTY_FRACTION || fs.x_b >= 1.0 - EMPTY_FRACTION
        {
            return Err(Error::Domain(format!(
                "derivative undefined at the feasibility boundary (x_a = {}, x_b = {})",
                fs.x_a, fs.x_b
            )));
        }
        let p_a = self.params.p_a;
        if budgets.is_one_stage() {
            let m_a = self.law_a.posterior_mean(fs.th_a)?;
            let m_b = self.law_b.posterior_mean(fs.th_b)?;
            return Ok(p_a / budgets.alpha1() * (m_a - m_b));
        }
        let th = self.second_stage(&fs, budgets)?;
        let r_a = self.law_a.uplift(fs.th_a, th)?;
        let r_b = self.law_b.uplift(fs.th_b, th)?;
        Ok(p_a / budgets.alpha2() * (r_a - r_b))
    }

    /// Stage-one fraction of the group-oblivious rule: a single common
    /// threshold θ̂ with Σ_G p_G·P(Ŵ ≥ θ̂ | G) = α₁.
    pub fn fraction_group_oblivious(&self, alpha1: f64) -> Result<f64> {
        if !(alpha1 > 0.0 && alpha1 <= 1.0) {
            return Err(Error::Domain(format!(
                "alpha1 must be in (0,1], got {alpha1}"
            )));
        }
        if alpha1 >= 1.0 - EMPTY_FRACTION {
            return Ok(1.0);
        }
        let p_a = self.params.p_a;
        let p_b = 1.0 - p_a;
        let (w_lo, w_hi) = self.params.dist.support();
        let pad = 13.5 * self.params.sigma(Group::A).max(self.params.sigma(Group::B));
        let th = roots::solve_bracketed(
            |t| Ok(p_a * self.law_a.tail(t)? + p_b * self.law_b.tail(t)? - alpha1),
            w_lo - pad - 1.0,
            w_hi + pad,
            &self.opts.root,
        )?;
        self.law_a.tail(th)
    }

    /// Stage-one fraction of the γ-rule: the group-oblivious fraction clamped
    /// onto the γ-fair interval [α₁/(p_A+p_B/γ), α₁/(p_A+p_B·γ)].
    pub fn fraction_gamma_rule(&self, alpha1: f64, gamma: f64) -> Result<f64> {
        if !(0.0..=1.0).contains(&gamma) {
            return Err(Error::Domain(format!("gamma must be in [0,1], got {gamma}")));
        }
        let x_obl = self.fraction_group_oblivious(alpha1)?;
        let p_a = self.params.p_a;
        let p_b = 1.0 - p_a;
        let upper = alpha1 / (p_a + p_b * gamma);
        let lower = if gamma == 0.0 {
            0.0
        } else {
            alpha1 / (p_a + p_b / gamma)
        };
        Ok(upper.min(x_obl.max(lower)))
    }

    /// Stage-one fraction under demographic parity: x_A = x_B = α₁.
    pub fn fraction_demographic_parity(alpha1: f64) -> f64 {
        alpha1
    }

    /// Stage-one fraction maximizing Q: the root of the strictly decreasing
    /// derivative, or the feasibility boundary when the derivative is
    /// one-signed.
    pub fn fraction_bayesian_optimal(&self, budgets: &Budgets) -> Result<f64> {
        let (lo, hi) = self.feasible_interval(budgets.alpha1());
        let width = hi - lo;
        if width <= 2e-7 {
            return Ok(0.5 * (lo + hi));
        }
        let margin = 1e-7_f64.min(1e-3 * width);
        let a = lo + margin;
        let b = hi - margin;
        if self.utility_derivative(a, budgets)? <= 0.0 {
            return Ok(lo);
        }
        if self.utility_derivative(b, budgets)? >= 0.0 {
            return Ok(hi);
        }
        roots::solve_bracketed(
            |x| self.utility_derivative(x, budgets),
            a,
            b,
            &RootOptions {
                f_tol: 1e-14,
                x_tol: 1e-10,
                max_iter: 200,
            },
        )
    }

    /// Stage-one fraction of any algorithm.
    pub fn fraction(&self, spec: &AlgorithmSpec, budgets: &Budgets) -> Result<f64> {
        match spec {
            AlgorithmSpec::GroupOblivious => self.fraction_group_oblivious(budgets.alpha1()),
            AlgorithmSpec::GammaRule(g) => self.fraction_gamma_rule(budgets.alpha1(), *g),
            AlgorithmSpec::DemographicParity => {
                Ok(Self::fraction_demographic_parity(budgets.alpha1()))
            }
            AlgorithmSpec::BayesianOptimal => self.fraction_bayesian_optimal(budgets),
        }
    }

    /// Fraction then utility: the full outcome of running an algorithm.
    pub fn run(&self, spec: &AlgorithmSpec, budgets: &Budgets) -> Result<SelectionOutcome> {
        let x_a = self.fraction(spec, budgets)?;
        self.utility(x_a, budgets)
    }
}
