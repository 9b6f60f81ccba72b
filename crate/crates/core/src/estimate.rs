//! The law of the noisy estimate Ŵ = W + σ·ε for one group, and the tail
//! integrals built on it.
//!
//! Everything here is a function of the pair (quality distribution, noise
//! scale σ). The normal quality distribution gets closed forms wherever they
//! exist; every other distribution goes through adaptive quadrature of
//!
//! ```text
//!   P(Ŵ ≥ θ̂, W ≥ θ)   = ∫_θ  p_W(w) · Φᶜ((θ̂−w)/σ) dw
//!   ∫ w over same set = ∫_θ  w · p_W(w) · Φᶜ((θ̂−w)/σ) dw
//! ```
//!
//! `f64::NEG_INFINITY` passed as a threshold means "no cut": those branches
//! short-circuit to the marginal quantities exactly, never by integrating
//! against a huge negative number.

use crate::dist::QualityDistribution;
use crate::error::{Error, Result};
use crate::model::{self, PosteriorParams};
use crate::quad::{self, QuadOptions};
use crate::roots::{self, RootOptions};
use crate::stdnorm;

/// Number of noise scales beyond which Φᶜ((θ̂−w)/σ) is numerically 0 or 1.
const NOISE_RANGE: f64 = 13.5;

#[derive(Debug, Clone, Copy)]
pub struct NumericOptions {
    pub quad: QuadOptions,
    pub root: RootOptions,
}

impl Default for NumericOptions {
    fn default() -> Self {
        Self {
            // tails feed root finders with f_tol 1e-12, so integrate tighter
            quad: QuadOptions {
                abs_tol: 1e-12,
                rel_tol: 1e-12,
                ..Default::default()
            },
            root: RootOptions::default(),
        }
    }
}

/// Distribution of the estimate Ŵ = W + σ·ε for one group.
#[derive(Debug, Clone)]
pub struct EstimateLaw {
    dist: QualityDistribution,
    sigma: f64,
    opts: NumericOptions,
    waypoints: Vec<f64>,
    support: (f64, f64),
}

impl EstimateLaw {
    pub fn new(dist: QualityDistribution, sigma: f64) -> Result<Self> {
        Self::with_options(dist, sigma, NumericOptions::default())
    }

    pub fn with_options(
        dist: QualityDistribution,
        sigma: f64,
        opts: NumericOptions,
    ) -> Result<Self> {
        if !(sigma.is_finite() && sigma >= 0.0) {
            return Err(Error::Domain(format!(
                "noise scale must be finite and >= 0, got {sigma}"
            )));
        }
        let waypoints = dist.waypoints();
        let support = dist.support();
        Ok(Self {
            dist,
            sigma,
            opts,
            waypoints,
            support,
        })
    }

    pub fn dist(&self) -> &QualityDistribution {
        &self.dist
    }

    pub fn sigma(&self) -> f64 {
        self.sigma
    }

    /// (mean, sd) of Ŵ when W is normal: (μ_W, √(σ_W² + σ²)).
    pub fn normal_law(&self) -> Result<(f64, f64)> {
        match self.dist.normal_params() {
            Some((mu, sd)) => Ok((mu, sd.hypot(self.sigma))),
            None => Err(Error::NoClosedForm(
                "estimate law is normal only for normal quality; use the quadrature path".into(),
            )),
        }
    }

    /// P(Ŵ ≥ θ̂).
    pub fn tail(&self, th_hat: f64) -> Result<f64> {
        if th_hat == f64::NEG_INFINITY {
            return Ok(1.0);
        }
        if self.sigma == 0.0 {
            return Ok(self.dist.ccdf(th_hat));
        }
        if let Some((mu, sd)) = self.dist.normal_params() {
            return Ok(stdnorm::ccdf((th_hat - mu) / sd.hypot(self.sigma)));
        }
        self.tail_quadrature(th_hat)
    }

    /// Quadrature path for [`tail`](Self::tail), also used to cross-check the
    /// closed form on normal quality.
    pub fn tail_quadrature(&self, th_hat: f64) -> Result<f64> {
        self.joint_tail_quadrature(th_hat, f64::NEG_INFINITY)
    }

    /// The θ̂ with P(Ŵ ≥ θ̂) = tail.
    pub fn upper_quantile(&self, tail: f64) -> Result<f64> {
        if !(tail > 0.0 && tail < 1.0) {
            return Err(Error::Domain(format!(
                "estimate upper_quantile requires tail in (0,1), got {tail}"
            )));
        }
        if self.sigma == 0.0 {
            return self.dist.upper_quantile(tail);
        }
        if let Some((mu, sd)) = self.dist.normal_params() {
            return Ok(mu + sd.hypot(self.sigma) * stdnorm::upper_quantile(tail)?);
        }
        let (lo, hi) = self.support;
        let pad = NOISE_RANGE * self.sigma;
        roots::solve_bracketed(
            |th| Ok(self.tail(th)? - tail),
            lo - pad,
            hi + pad,
            &self.opts.root,
        )
    }

    /// Joint tail y(θ̂, θ) = P(Ŵ ≥ θ̂, W ≥ θ). Monotone nonincreasing in both
    /// arguments; equals the marginal tail at θ = −∞.
    pub fn joint_tail(&self, th_hat: f64, th: f64) -> Result<f64> {
        if th == f64::NEG_INFINITY {
            return self.tail(th_hat);
        }
        if th_hat == f64::NEG_INFINITY {
            return Ok(self.dist.ccdf(th));
        }
        if self.sigma == 0.0 {
            return Ok(self.dist.ccdf(th_hat.max(th)));
        }
        self.joint_tail_quadrature(th_hat, th)
    }

    fn joint_tail_quadrature(&self, th_hat: f64, th: f64) -> Result<f64> {
        if self.sigma == 0.0 {
            return Ok(self.dist.ccdf(th_hat.max(th)));
        }
        let (lo, hi) = self.support;
        let a = lo.max(th).max(th_hat - NOISE_RANGE * self.sigma);
        if a >= hi {
            return Ok(0.0);
        }
        let pts = self.segments(a, hi, Some(th_hat));
        let q = quad::integrate_split(
            |w| self.dist.pdf(w) * stdnorm::ccdf((th_hat - w) / self.sigma),
            &pts,
            &self.opts.quad,
        )?;
        Ok(q.value.clamp(0.0, 1.0))
    }

    /// Unnormalized quality mass ∫_θ w·p_W(w)·Φᶜ((θ̂−w)/σ) dw. Dividing by
    /// [`joint_tail`](Self::joint_tail) gives E[W | Ŵ ≥ θ̂, W ≥ θ].
    pub fn quality_mass(&self, th_hat: f64, th: f64) -> Result<f64> {
        if th_hat == f64::NEG_INFINITY {
            return Ok(self.dist.tail_mean_mass(th));
        }
        if self.sigma == 0.0 {
            return Ok(self.dist.tail_mean_mass(th_hat.max(th)));
        }
        if th == f64::NEG_INFINITY {
            if let Some((mu, sd)) = self.dist.normal_params() {
                // E[W·1{Ŵ≥θ̂}] = μ·Φᶜ(z) + (σ_W²/s)·φ(z), s² = σ_W² + σ²
                let s = sd.hypot(self.sigma);
                let z = (th_hat - mu) / s;
                return Ok(mu * stdnorm::ccdf(z) + sd * sd / s * stdnorm::pdf(z));
            }
        }
        self.quality_mass_quadrature(th_hat, th)
    }

    /// Quadrature path for [`quality_mass`](Self::quality_mass).
    pub fn quality_mass_quadrature(&self, th_hat: f64, th: f64) -> Result<f64> {
        let (lo, hi) = self.support;
        if self.sigma == 0.0 {
            return Ok(self.dist.tail_mean_mass(th_hat.max(th)));
        }
        let a = lo.max(th).max(th_hat - NOISE_RANGE * self.sigma);
        if a >= hi {
            return Ok(0.0);
        }
        let pts = self.segments(a, hi, Some(th_hat));
        let q = quad::integrate_split(
            |w| w * self.dist.pdf(w) * stdnorm::ccdf((th_hat - w) / self.sigma),
            &pts,
            &self.opts.quad,
        )?;
        Ok(q.value)
    }

    /// Posterior mean E[W | Ŵ = ŵ]: shrinkage formula for normal quality,
    /// quadrature ratio otherwise.
    pub fn posterior_mean(&self, w_hat: f64) -> Result<f64> {
        if self.sigma == 0.0 {
            return Ok(w_hat);
        }
        if let Some((mu, sd)) = self.dist.normal_params() {
            return Ok(model::posterior_mean(w_hat, self.sigma, mu, sd));
        }
        self.posterior_mean_quadrature(w_hat)
    }

    /// Quadrature path for [`posterior_mean`](Self::posterior_mean):
    /// ∫ w·p_W(w)·φ_σ(w−ŵ) dw / ∫ p_W(w)·φ_σ(w−ŵ) dw.
    pub fn posterior_mean_quadrature(&self, w_hat: f64) -> Result<f64> {
        let (num, den) = self.conditional_moments(w_hat, None)?;
        Ok(num / den)
    }

    /// Posterior parameters of W given Ŵ = ŵ (normal quality only).
    pub fn posterior_params(&self, w_hat: f64) -> Result<PosteriorParams> {
        match self.dist.normal_params() {
            Some((mu, sd)) => Ok(model::posterior_params(w_hat, self.sigma, mu, sd)),
            None => Err(Error::NoClosedForm(
                "posterior parameters are closed-form only for normal quality".into(),
            )),
        }
    }

    /// Expected shortfall-above-θ at the margin, E[(W−θ)⁺ | Ŵ = θ̂]. This is
    /// the per-group factor of the two-stage utility derivative.
    pub fn uplift(&self, th_hat: f64, th: f64) -> Result<f64> {
        if th == f64::NEG_INFINITY {
            return Err(Error::Domain(
                "uplift needs a finite second-stage threshold; one-stage uses the posterior mean"
                    .into(),
            ));
        }
        if self.sigma == 0.0 {
            return Ok((th_hat - th).max(0.0));
        }
        if self.dist.normal_params().is_some() {
            let post = self.posterior_params(th_hat)?;
            return Ok(post.sd * stdnorm::cdf_integral((post.mean - th) / post.sd));
        }
        self.uplift_quadrature(th_hat, th)
    }

    /// Quadrature path for [`uplift`](Self::uplift):
    /// ∫_θ (w−θ)·p_W(w)·φ_σ(w−θ̂) dw / ∫ p_W(w)·φ_σ(w−θ̂) dw.
    pub fn uplift_quadrature(&self, th_hat: f64, th: f64) -> Result<f64> {
        let (num, den) = self.conditional_moments(th_hat, Some(th))?;
        Ok(num / den)
    }

    /// Numerator/denominator pair of the conditional-on-Ŵ=ŵ integrals.
    /// `shortfall = Some(θ)` integrates (w−θ)⁺ instead of w.
    fn conditional_moments(&self, w_hat: f64, shortfall: Option<f64>) -> Result<(f64, f64)> {
        let (lo, hi) = self.support;
        let a = lo.max(w_hat - NOISE_RANGE * self.sigma);
        let b = hi.min(w_hat + NOISE_RANGE * self.sigma);
        if a >= b {
            return Err(Error::Numerical(format!(
                "estimate {w_hat} is more than {NOISE_RANGE} noise scales outside the quality support"
            )));
        }
        // ratio of integrals: tolerances must be relative, never absolute,
        // because the shared density factor can be arbitrarily small
        let opts = QuadOptions {
            abs_tol: 1e-290,
            rel_tol: 1e-11,
            ..self.opts.quad
        };
        let kernel = |w: f64| self.dist.pdf(w) * stdnorm::pdf((w - w_hat) / self.sigma);
        let pts = self.segments(a, b, Some(w_hat));
        let den = quad::integrate_split(kernel, &pts, &opts)?.value;
        if !(den > 1e-290) {
            return Err(Error::Numerical(format!(
                "conditional density underflows at estimate {w_hat}"
            )));
        }
        let num = match shortfall {
            None => quad::integrate_split(|w| w * kernel(w), &pts, &opts)?.value,
            Some(th) => {
                if th >= b {
                    return Ok((0.0, den));
                }
                let a2 = a.max(th);
                let pts2 = self.segments(a2, b, Some(w_hat));
                quad::integrate_split(|w| (w - th) * kernel(w), &pts2, &opts)?.value
            }
        };
        Ok((num, den))
    }

    /// Initial quadrature segmentation of [a, b]: distribution waypoints plus
    /// a ladder around the threshold where the noise cdf factor turns over.
    fn segments(&self, a: f64, b: f64, center: Option<f64>) -> Vec<f64> {
        let mut pts = Vec::with_capacity(self.waypoints.len() + 16);
        pts.push(a);
        pts.extend(self.waypoints.iter().copied().filter(|w| *w > a && *w < b));
        if let Some(c) = center {
            if self.sigma > 0.0 {
                for k in [-8.0, -4.0, -2.0, -1.0, -0.5, 0.0, 0.5, 1.0, 2.0, 4.0, 8.0] {
                    let w = c + k * self.sigma;
                    if w > a && w < b {
                        pts.push(w);
                    }
                }
            }
        }
        pts.push(b);
        pts.sort_by(f64::total_cmp);
        pts.dedup();
        pts
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::dist::QualityDistribution;

    fn normal_law(sigma: f64) -> EstimateLaw {
        EstimateLaw::new(QualityDistribution::normal(1.0, 1.0).unwrap(), sigma).unwrap()
    }

    fn pareto_law(sigma: f64) -> EstimateLaw {
        EstimateLaw::new(QualityDistribution::pareto(1.0, 3.0).unwrap(), sigma).unwrap()
    }

    #[test]
    fn normal_law_parameters() {
        let (mu, s) = normal_law(3.0).normal_law().unwrap();
        assert_eq!(mu, 1.0);
        assert!((s - 10f64.sqrt()).abs() < 1e-15);

        let (mu, s) = normal_law(0.0).normal_law().unwrap();
        assert_eq!((mu, s), (1.0, 1.0));

        let law = EstimateLaw::new(QualityDistribution::normal(0.0, 1.0).unwrap(), 0.2).unwrap();
        let (mu, s) = law.normal_law().unwrap();
        assert_eq!(mu, 0.0);
        assert!((s - 1.04f64.sqrt()).abs() < 1e-15);
    }

    #[test]
    fn normal_law_requires_normal_quality() {
        assert!(matches!(
            pareto_law(1.0).normal_law(),
            Err(Error::NoClosedForm(_))
        ));
    }

    #[test]
    fn joint_tail_reduces_to_marginal_exactly() {
        for law in [normal_law(3.0), pareto_law(1.0)] {
            for th_hat in [-1.0, 0.5, 2.0, 4.0] {
                let marginal = law.tail(th_hat).unwrap();
                let joint = law.joint_tail(th_hat, f64::NEG_INFINITY).unwrap();
                assert_eq!(joint, marginal);
            }
        }
    }

    #[test]
    fn joint_tail_with_no_first_stage_is_quality_tail() {
        let law = normal_law(3.0);
        for alpha2 in [0.05, 0.3, 0.8] {
            let th = law.dist().upper_quantile(alpha2).unwrap();
            let y = law.joint_tail(f64::NEG_INFINITY, th).unwrap();
            assert!((y - alpha2).abs() < 1e-8);
        }
    }

    #[test]
    fn closed_forms_match_quadrature_on_normal_quality() {
        let law = normal_law(3.0);
        for th in [-2.0, 0.0, 1.0, 3.0, 6.0] {
            let closed = law.tail(th).unwrap();
            let numeric = law.tail_quadrature(th).unwrap();
            assert!((closed - numeric).abs() < 1e-6, "tail at {th}");

            let closed = law.quality_mass(th, f64::NEG_INFINITY).unwrap();
            let numeric = law.quality_mass_quadrature(th, f64::NEG_INFINITY).unwrap();
            assert!((closed - numeric).abs() < 1e-6, "mass at {th}");

            let closed = law.posterior_mean(th).unwrap();
            let numeric = law.posterior_mean_quadrature(th).unwrap();
            assert!((closed - numeric).abs() < 1e-6, "posterior mean at {th}");

            let closed = law.uplift(th, 1.3).unwrap();
            let numeric = law.uplift_quadrature(th, 1.3).unwrap();
            assert!((closed - numeric).abs() < 1e-6, "uplift at {th}");
        }
    }

    #[test]
    fn quality_mass_without_conditioning_is_mean() {
        for law in [normal_law(3.0), pareto_law(1.0)] {
            let m = law
                .quality_mass(f64::NEG_INFINITY, f64::NEG_INFINITY)
                .unwrap();
            assert_eq!(m, law.dist().mean());
        }
    }

    #[test]
    fn truncated_mean_identity_for_normal_quality() {
        // with no first-stage cut the conditional mean is the truncated mean:
        // mass = α·(μ + σ·φ(z)/Φᶜ(z)) with z the α-upper quantile
        let law = normal_law(3.0);
        for alpha in [0.1, 0.4, 0.75] {
            let z = stdnorm::upper_quantile(alpha).unwrap();
            let th = 1.0 + z;
            let mass = law.quality_mass(f64::NEG_INFINITY, th).unwrap();
            let expected = alpha * (1.0 + stdnorm::pdf(z) / stdnorm::ccdf(z));
            assert!((mass - expected).abs() < 1e-8);
        }
    }

    #[test]
    fn zero_noise_collapses_to_quality_distribution() {
        let law = normal_law(0.0);
        assert_eq!(law.tail(1.5).unwrap(), law.dist().ccdf(1.5));
        assert_eq!(law.joint_tail(1.5, 2.0).unwrap(), law.dist().ccdf(2.0));
        assert_eq!(law.posterior_mean(2.7).unwrap(), 2.7);
        assert_eq!(law.uplift(2.0, 1.5).unwrap(), 0.5);
        assert_eq!(law.uplift(1.0, 1.5).unwrap(), 0.0);
    }

    #[test]
    fn upper_quantile_roundtrip_general_path() {
        let law = pareto_law(1.0);
        for x in [0.01, 0.1, 0.5, 0.9] {
            let th = law.upper_quantile(x).unwrap();
            assert!((law.tail(th).unwrap() - x).abs() < 1e-10, "x={x}");
        }
    }

    #[test]
    fn joint_tail_monotone_grid() {
        let law = normal_law(3.0);
        let mut prev_by_th = f64::INFINITY;
        for th in [-1.0, 0.0, 1.0, 2.0, 3.0] {
            let v = law.joint_tail(1.0, th).unwrap();
            assert!(v <= prev_by_th + 1e-12);
            prev_by_th = v;
        }
        let mut prev_by_th_hat = f64::INFINITY;
        for th_hat in [-1.0, 0.0, 1.0, 2.0, 3.0] {
            let v = law.joint_tail(th_hat, 1.0).unwrap();
            assert!(v <= prev_by_th_hat + 1e-12);
            prev_by_th_hat = v;
        }
    }

    #[test]
    fn conditional_mean_rises_with_second_stage_bar() {
        let law = normal_law(3.0);
        let mut prev = f64::NEG_INFINITY;
        for th in [-2.0, -1.0, 0.0, 1.0, 2.0] {
            let mean = law.quality_mass(1.0, th).unwrap() / law.joint_tail(1.0, th).unwrap();
            assert!(mean >= prev - 1e-10, "th={th}");
            prev = mean;
        }
    }
}
