//! Property tests over randomized parameters.

use fairsel_core::dist::QualityDistribution;
use fairsel_core::estimate::EstimateLaw;
use fairsel_core::model::posterior_mean;
use fairsel_core::stdnorm;
use proptest::prelude::*;

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn cdf_integral_symmetry(u in -8.0f64..8.0) {
        let lhs = stdnorm::cdf_integral(u) - stdnorm::cdf_integral(-u);
        prop_assert!((lhs - u).abs() < 1e-12);
    }

    #[test]
    fn stdnorm_quantile_roundtrip(p in 0.0005f64..0.9995) {
        let x = stdnorm::quantile(p).unwrap();
        prop_assert!((stdnorm::cdf(x) - p).abs() < 1e-13);
    }

    #[test]
    fn normal_quantile_cdf_roundtrip(
        mean in -5.0f64..5.0,
        sd in 0.1f64..4.0,
        p in 0.001f64..0.999,
    ) {
        let d = QualityDistribution::normal(mean, sd).unwrap();
        let w = d.quantile(p).unwrap();
        prop_assert!((d.cdf(w) - p).abs() < 1e-8);
    }

    #[test]
    fn pareto_quantile_cdf_roundtrip(
        scale in 0.2f64..5.0,
        shape in 1.2f64..6.0,
        p in 0.001f64..0.999,
    ) {
        let d = QualityDistribution::pareto(scale, shape).unwrap();
        let w = d.quantile(p).unwrap();
        prop_assert!((d.cdf(w) - p).abs() < 1e-8);
    }

    #[test]
    fn uniform_quantile_cdf_roundtrip(
        lo in -5.0f64..0.0,
        span in 0.5f64..10.0,
        p in 0.001f64..0.999,
    ) {
        let d = QualityDistribution::uniform(lo, lo + span).unwrap();
        let w = d.quantile(p).unwrap();
        prop_assert!((d.cdf(w) - p).abs() < 1e-8);
    }

    #[test]
    fn posterior_mean_shrinks_toward_prior(
        w_hat in -20.0f64..20.0,
        sigma in 0.0f64..10.0,
        mu in -3.0f64..3.0,
        sd in 0.2f64..3.0,
    ) {
        let m = posterior_mean(w_hat, sigma, mu, sd);
        // the posterior mean lies between the estimate and the prior mean
        let lo = w_hat.min(mu) - 1e-12;
        let hi = w_hat.max(mu) + 1e-12;
        prop_assert!(m >= lo && m <= hi);
    }

    #[test]
    fn joint_tail_is_a_probability_and_monotone(
        th_hat in -4.0f64..6.0,
        th in -4.0f64..4.0,
        sigma in 0.0f64..5.0,
    ) {
        let law = EstimateLaw::new(QualityDistribution::normal(1.0, 1.0).unwrap(), sigma).unwrap();
        let y = law.joint_tail(th_hat, th).unwrap();
        prop_assert!((0.0..=1.0).contains(&y));
        let y_higher_bar = law.joint_tail(th_hat, th + 0.5).unwrap();
        prop_assert!(y_higher_bar <= y + 1e-10);
        let y_higher_cut = law.joint_tail(th_hat + 0.5, th).unwrap();
        prop_assert!(y_higher_cut <= y + 1e-10);
    }
}
