//! Distributions of the true latent quality `W`.
//!
//! Every variant exposes pdf/cdf/quantile, the mean, the upper-tail mean
//! mass ∫_t w·p(w) dw in closed form, and an effective (truncated) support
//! plus waypoints that the quadrature layer uses as initial segment
//! boundaries. Sampling is by inverse cdf, so one uniform draw maps to one
//! quality value deterministically.

use crate::error::{Error, Result};
use crate::roots::{self, RootOptions};
use crate::stdnorm;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MixtureComponent {
    pub weight: f64,
    pub mean: f64,
    pub sd: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub enum QualityDistribution {
    Normal { mean: f64, sd: f64 },
    /// Power law with density κ·w₀^κ / w^(κ+1) on [w₀, ∞). Requires κ > 1 so
    /// the mean is finite.
    Pareto { scale: f64, shape: f64 },
    Uniform { lo: f64, hi: f64 },
    Mixture { components: Vec<MixtureComponent> },
    /// Beta(α, β) stretched onto [loc, loc+scale].
    Beta { alpha: f64, beta: f64, loc: f64, scale: f64 },
}

impl QualityDistribution {
    pub fn normal(mean: f64, sd: f64) -> Result<Self> {
        if !(mean.is_finite() && sd.is_finite() && sd > 0.0) {
            return Err(Error::Domain(format!(
                "normal quality requires finite mean and sd > 0, got ({mean}, {sd})"
            )));
        }
        Ok(Self::Normal { mean, sd })
    }

    pub fn pareto(scale: f64, shape: f64) -> Result<Self> {
        if !(scale.is_finite() && scale > 0.0) {
            return Err(Error::Domain(format!("pareto scale must be > 0, got {scale}")));
        }
        if !(shape.is_finite() && shape > 1.0) {
            return Err(Error::Domain(format!(
                "pareto shape must be > 1 for a finite mean, got {shape}"
            )));
        }
        Ok(Self::Pareto { scale, shape })
    }

    pub fn uniform(lo: f64, hi: f64) -> Result<Self> {
        if !(lo.is_finite() && hi.is_finite() && lo < hi) {
            return Err(Error::Domain(format!(
                "uniform quality requires lo < hi, got ({lo}, {hi})"
            )));
        }
        Ok(Self::Uniform { lo, hi })
    }

    pub fn mixture(components: Vec<MixtureComponent>) -> Result<Self> {
        if components.is_empty() {
            return Err(Error::Domain("mixture needs at least one component".into()));
        }
        let mut total = 0.0;
        for c in &components {
            if !(c.weight > 0.0 && c.mean.is_finite() && c.sd.is_finite() && c.sd > 0.0) {
                return Err(Error::Domain(format!(
                    "mixture component needs weight > 0 and sd > 0, got {c:?}"
                )));
            }
            total += c.weight;
        }
        if (total - 1.0).abs() > 1e-9 {
            return Err(Error::Domain(format!(
                "mixture weights must sum to 1, got {total}"
            )));
        }
        // renormalize the residual 1e-9 so downstream identities hold exactly
        let components = components
            .into_iter()
            .map(|c| MixtureComponent {
                weight: c.weight / total,
                ..c
            })
            .collect();
        Ok(Self::Mixture { components })
    }

    pub fn beta(alpha: f64, beta: f64, loc: f64, scale: f64) -> Result<Self> {
        if !(alpha > 0.0 && beta > 0.0 && alpha.is_finite() && beta.is_finite()) {
            return Err(Error::Domain(format!(
                "beta shapes must be positive, got ({alpha}, {beta})"
            )));
        }
        if !(loc.is_finite() && scale.is_finite() && scale > 0.0) {
            return Err(Error::Domain(format!(
                "beta location/scale must be finite with scale > 0, got ({loc}, {scale})"
            )));
        }
        Ok(Self::Beta { alpha, beta, loc, scale })
    }

    /// (mean, sd) when the distribution is exactly normal.
    pub fn normal_params(&self) -> Option<(f64, f64)> {
        match self {
            Self::Normal { mean, sd } => Some((*mean, *sd)),
            _ => None,
        }
    }

    pub fn mean(&self) -> f64 {
        match self {
            Self::Normal { mean, .. } => *mean,
            Self::Pareto { scale, shape } => shape * scale / (shape - 1.0),
            Self::Uniform { lo, hi } => 0.5 * (lo + hi),
            Self::Mixture { components } => {
                components.iter().map(|c| c.weight * c.mean).sum()
            }
            Self::Beta { alpha, beta, loc, scale } => loc + scale * alpha / (alpha + beta),
        }
    }

    pub fn pdf(&self, w: f64) -> f64 {
        match self {
            Self::Normal { mean, sd } => stdnorm::pdf((w - mean) / sd) / sd,
            Self::Pareto { scale, shape } => {
                if w < *scale {
                    0.0
                } else {
                    shape * scale.powf(*shape) / w.powf(shape + 1.0)
                }
            }
            Self::Uniform { lo, hi } => {
                if w < *lo || w > *hi {
                    0.0
                } else {
                    1.0 / (hi - lo)
                }
            }
            Self::Mixture { components } => components
                .iter()
                .map(|c| c.weight * stdnorm::pdf((w - c.mean) / c.sd) / c.sd)
                .sum(),
            Self::Beta { alpha, beta, loc, scale } => {
                let t = (w - loc) / scale;
                if !(0.0..=1.0).contains(&t) {
                    return 0.0;
                }
                if (t == 0.0 && *alpha < 1.0) || (t == 1.0 && *beta < 1.0) {
                    return f64::INFINITY;
                }
                if (t == 0.0 && *alpha > 1.0) || (t == 1.0 && *beta > 1.0) {
                    return 0.0;
                }
                let log_pdf = (alpha - 1.0) * t.ln() + (beta - 1.0) * (1.0 - t).ln()
                    - statrs::function::beta::ln_beta(*alpha, *beta);
                log_pdf.exp() / scale
            }
        }
    }

    pub fn cdf(&self, w: f64) -> f64 {
        match self {
            Self::Normal { mean, sd } => stdnorm::cdf((w - mean) / sd),
            Self::Pareto { scale, shape } => {
                if w <= *scale {
                    0.0
                } else {
                    1.0 - (scale / w).powf(*shape)
                }
            }
            Self::Uniform { lo, hi } => ((w - lo) / (hi - lo)).clamp(0.0, 1.0),
            Self::Mixture { components } => components
                .iter()
                .map(|c| c.weight * stdnorm::cdf((w - c.mean) / c.sd))
                .sum(),
            Self::Beta { alpha, beta, loc, scale } => {
                let t = ((w - loc) / scale).clamp(0.0, 1.0);
                statrs::function::beta::beta_reg(*alpha, *beta, t)
            }
        }
    }

    /// Upper-tail probability P(W ≥ w), computed without the cancellation of
    /// 1 − cdf for small tails.
    pub fn ccdf(&self, w: f64) -> f64 {
        match self {
            Self::Normal { mean, sd } => stdnorm::ccdf((w - mean) / sd),
            Self::Pareto { scale, shape } => {
                if w <= *scale {
                    1.0
                } else {
                    (scale / w).powf(*shape)
                }
            }
            Self::Uniform { lo, hi } => ((hi - w) / (hi - lo)).clamp(0.0, 1.0),
            Self::Mixture { components } => components
                .iter()
                .map(|c| c.weight * stdnorm::ccdf((w - c.mean) / c.sd))
                .sum(),
            Self::Beta { alpha, beta, loc, scale } => {
                let t = ((w - loc) / scale).clamp(0.0, 1.0);
                statrs::function::beta::beta_reg(*beta, *alpha, 1.0 - t)
            }
        }
    }

    /// Quantile for p in (0,1).
    pub fn quantile(&self, p: f64) -> Result<f64> {
        if !(p > 0.0 && p < 1.0) {
            return Err(Error::Domain(format!("quantile requires p in (0,1), got {p}")));
        }
        match self {
            Self::Normal { mean, sd } => Ok(mean + sd * stdnorm::quantile(p)?),
            Self::Pareto { scale, shape } => Ok(scale * (1.0 - p).powf(-1.0 / shape)),
            Self::Uniform { lo, hi } => Ok(lo + p * (hi - lo)),
            Self::Mixture { .. } | Self::Beta { .. } => self.quantile_by_root(p),
        }
    }

    /// Upper quantile: the w with P(W ≥ w) = tail. Exact complementary form,
    /// so tail masses like 1e−12 stay resolvable.
    pub fn upper_quantile(&self, tail: f64) -> Result<f64> {
        if !(tail > 0.0 && tail < 1.0) {
            return Err(Error::Domain(format!(
                "upper_quantile requires tail in (0,1), got {tail}"
            )));
        }
        match self {
            Self::Normal { mean, sd } => Ok(mean + sd * stdnorm::upper_quantile(tail)?),
            Self::Pareto { scale, shape } => Ok(scale * tail.powf(-1.0 / shape)),
            Self::Uniform { lo, hi } => Ok(hi - tail * (hi - lo)),
            Self::Mixture { .. } | Self::Beta { .. } => {
                let (lo, hi) = self.support();
                roots::solve_bracketed(
                    |w| Ok(self.ccdf(w) - tail),
                    lo,
                    hi,
                    &RootOptions {
                        f_tol: 1e-14,
                        ..Default::default()
                    },
                )
            }
        }
    }

    fn quantile_by_root(&self, p: f64) -> Result<f64> {
        let (lo, hi) = self.support();
        roots::solve_bracketed(
            |w| Ok(self.cdf(w) - p),
            lo,
            hi,
            &RootOptions {
                f_tol: 1e-14,
                ..Default::default()
            },
        )
    }

    /// Effective support used for quadrature. Gaussian factors are truncated
    /// at ±12σ; the Pareto upper end is pushed far enough that the discarded
    /// tail mean mass is below 1e−11.
    pub fn support(&self) -> (f64, f64) {
        match self {
            Self::Normal { mean, sd } => (mean - 12.0 * sd, mean + 12.0 * sd),
            Self::Pareto { scale, shape } => {
                let by_prob = 1e15_f64.powf(1.0 / shape);
                let by_mean = (shape / ((shape - 1.0) * 1e-11)).powf(1.0 / (shape - 1.0));
                (*scale, scale * by_prob.max(by_mean).min(1e250))
            }
            Self::Uniform { lo, hi } => (*lo, *hi),
            Self::Mixture { components } => {
                let lo = components
                    .iter()
                    .map(|c| c.mean - 12.0 * c.sd)
                    .fold(f64::INFINITY, f64::min);
                let hi = components
                    .iter()
                    .map(|c| c.mean + 12.0 * c.sd)
                    .fold(f64::NEG_INFINITY, f64::max);
                (lo, hi)
            }
            Self::Beta { loc, scale, .. } => (*loc, loc + scale),
        }
    }

    /// Interior points where the density changes scale, used as initial
    /// quadrature segment boundaries. Always sorted, inside the support.
    pub fn waypoints(&self) -> Vec<f64> {
        let (lo, hi) = self.support();
        let mut pts = match self {
            Self::Normal { mean, sd } => GAUSS_LADDER
                .iter()
                .map(|k| mean + k * sd)
                .collect::<Vec<_>>(),
            Self::Pareto { scale, shape } => (1..=14)
                .map(|j| scale * 10f64.powf(j as f64 / (2.0 * shape)))
                .collect(),
            Self::Uniform { lo, hi } => vec![0.5 * (lo + hi)],
            Self::Mixture { components } => components
                .iter()
                .flat_map(|c| GAUSS_LADDER.iter().map(move |k| c.mean + k * c.sd))
                .collect(),
            Self::Beta { loc, scale, .. } => [0.02, 0.1, 0.25, 0.5, 0.75, 0.9, 0.98]
                .iter()
                .map(|t| loc + t * scale)
                .collect(),
        };
        pts.retain(|w| *w > lo && *w < hi);
        pts.sort_by(f64::total_cmp);
        pts.dedup();
        pts
    }

    /// Upper-tail mean mass ∫_t^∞ w·p(w) dw in closed form. With t = −∞ this
    /// is the mean.
    pub fn tail_mean_mass(&self, t: f64) -> f64 {
        if t == f64::NEG_INFINITY {
            return self.mean();
        }
        match self {
            Self::Normal { mean, sd } => {
                let z = (t - mean) / sd;
                mean * stdnorm::ccdf(z) + sd * stdnorm::pdf(z)
            }
            Self::Pareto { scale, shape } => {
                let t = t.max(*scale);
                shape * scale.powf(*shape) / (shape - 1.0) * t.powf(1.0 - shape)
            }
            Self::Uniform { lo, hi } => {
                let t = t.clamp(*lo, *hi);
                (hi * hi - t * t) / (2.0 * (hi - lo))
            }
            Self::Mixture { components } => components
                .iter()
                .map(|c| {
                    let z = (t - c.mean) / c.sd;
                    c.weight * (c.mean * stdnorm::ccdf(z) + c.sd * stdnorm::pdf(z))
                })
                .sum(),
            Self::Beta { alpha, beta, loc, scale } => {
                let u = ((t - loc) / scale).clamp(0.0, 1.0);
                let std_mass = alpha / (alpha + beta)
                    * statrs::function::beta::beta_reg(*beta, alpha + 1.0, 1.0 - u);
                loc * self.ccdf(t) + scale * std_mass
            }
        }
    }
}

const GAUSS_LADDER: [f64; 17] = [
    -12.0, -9.0, -6.0, -4.5, -3.0, -2.0, -1.0, -0.5, 0.0, 0.5, 1.0, 2.0, 3.0, 4.5, 6.0, 9.0, 12.0,
];

#[cfg(test)]
mod tests {
    use super::*;
    use crate::quad::{self, QuadOptions};

    fn variants() -> Vec<QualityDistribution> {
        vec![
            QualityDistribution::normal(1.0, 1.0).unwrap(),
            QualityDistribution::pareto(1.0, 3.0).unwrap(),
            QualityDistribution::uniform(-2.0, 5.0).unwrap(),
            QualityDistribution::mixture(vec![
                MixtureComponent { weight: 0.3, mean: -1.0, sd: 0.5 },
                MixtureComponent { weight: 0.7, mean: 2.0, sd: 1.5 },
            ])
            .unwrap(),
            QualityDistribution::beta(2.0, 5.0, -1.0, 4.0).unwrap(),
        ]
    }

    fn integrate_pdf(d: &QualityDistribution) -> f64 {
        let (lo, hi) = d.support();
        let mut pts = vec![lo];
        pts.extend(d.waypoints());
        pts.push(hi);
        quad::integrate_split(|w| d.pdf(w), &pts, &QuadOptions::default())
            .unwrap()
            .value
    }

    #[test]
    fn pdf_normalizes_over_support() {
        for d in variants() {
            let total = integrate_pdf(&d);
            assert!((total - 1.0).abs() <= 1e-8, "{d:?}: total={total}");
        }
    }

    #[test]
    fn quantile_cdf_roundtrip_on_probability_grid() {
        for d in variants() {
            for i in 0..100 {
                let p = 0.001 + (0.999 - 0.001) * i as f64 / 99.0;
                let w = d.quantile(p).unwrap();
                assert!((d.cdf(w) - p).abs() <= 1e-8, "{d:?} p={p}");
            }
        }
    }

    #[test]
    fn cdf_quantile_roundtrip_in_value_space() {
        // interior points: w spanning the (0.001, 0.999) quantile range
        for d in variants() {
            for i in 0..=40 {
                let p = 0.001 + (0.999 - 0.001) * i as f64 / 40.0;
                let w = d.quantile(p).unwrap();
                let back = d.quantile(d.cdf(w)).unwrap();
                assert!(
                    (back - w).abs() <= 1e-8 * (1.0 + w.abs()),
                    "{d:?}: w={w}, back={back}"
                );
            }
        }
    }

    #[test]
    fn ccdf_complements_cdf() {
        for d in variants() {
            let (lo, hi) = d.support();
            for i in 0..=20 {
                let w = lo + (hi - lo) * i as f64 / 20.0;
                assert!((d.cdf(w) + d.ccdf(w) - 1.0).abs() <= 1e-12, "{d:?}");
            }
        }
    }

    #[test]
    fn mean_matches_quadrature() {
        for d in variants() {
            let (lo, hi) = d.support();
            let mut pts = vec![lo];
            pts.extend(d.waypoints());
            pts.push(hi);
            let m = quad::integrate_split(|w| w * d.pdf(w), &pts, &QuadOptions::default())
                .unwrap()
                .value;
            assert!((m - d.mean()).abs() <= 1e-8, "{d:?}: {m} vs {}", d.mean());
        }
    }

    #[test]
    fn tail_mean_mass_matches_quadrature() {
        for d in variants() {
            let (lo, hi) = d.support();
            for frac in [0.15, 0.5, 0.85] {
                let t = lo + (hi - lo) * frac;
                let mut pts = vec![t];
                pts.extend(d.waypoints().into_iter().filter(|w| *w > t));
                pts.push(hi);
                let q = quad::integrate_split(|w| w * d.pdf(w), &pts, &QuadOptions::default())
                    .unwrap()
                    .value;
                assert!(
                    (q - d.tail_mean_mass(t)).abs() <= 1e-7 * (1.0 + q.abs()),
                    "{d:?} t={t}: {q} vs {}",
                    d.tail_mean_mass(t)
                );
            }
            assert_eq!(d.tail_mean_mass(f64::NEG_INFINITY), d.mean());
        }
    }

    #[test]
    fn pareto_requires_finite_mean() {
        assert!(QualityDistribution::pareto(1.0, 1.0).is_err());
        assert!(QualityDistribution::pareto(1.0, 0.5).is_err());
        assert!(QualityDistribution::pareto(-1.0, 3.0).is_err());
        assert!(QualityDistribution::pareto(1.0, 1.01).is_ok());
    }

    #[test]
    fn constructor_validation() {
        assert!(QualityDistribution::normal(0.0, 0.0).is_err());
        assert!(QualityDistribution::uniform(2.0, 2.0).is_err());
        assert!(QualityDistribution::mixture(vec![
            MixtureComponent { weight: 0.5, mean: 0.0, sd: 1.0 },
            MixtureComponent { weight: 0.4, mean: 1.0, sd: 1.0 },
        ])
        .is_err());
        assert!(QualityDistribution::beta(0.0, 1.0, 0.0, 1.0).is_err());
    }

    #[test]
    fn pareto_tail_quantities_are_exact() {
        let d = QualityDistribution::pareto(1.0, 3.0).unwrap();
        assert!((d.ccdf(10.0) - 1e-3).abs() < 1e-18);
        assert!((d.upper_quantile(1e-12).unwrap() - 1e4).abs() < 1e-6);
        assert!((d.mean() - 1.5).abs() < 1e-15);
    }
}
