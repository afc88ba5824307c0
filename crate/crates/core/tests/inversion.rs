mod common;

use common::{atm_vol_newton, priced};
use ivexpand::inversion::*;
use ivexpand::*;
use proptest::prelude::*;

#[test]
fn short_expiry_round_trip_improves_as_expiry_shrinks() {
    let k = 0.5f64.exp();
    let mut prev = f64::INFINITY;
    for t in [0.2, 0.1, 0.05, 0.025] {
        let s = implied_vol_short_expiry(&priced(1.0, k, t, 0.2)).unwrap();
        let err = (s.sigma - 0.2).abs() / 0.2;
        assert!(err < prev, "T={t}: {err}");
        prev = err;
    }
    assert!(prev < 1e-3);
}

#[test]
fn short_expiry_leading_order() {
    let x = 0.5f64;
    let mut prev = f64::INFINITY;
    for t in [0.2, 0.05, 0.02] {
        let q = priced(1.0, x.exp(), t, 0.2);
        let s = implied_vol_short_expiry(&q).unwrap();
        let lambda = s.lambda.unwrap();
        let dev = (s.theta_sq / (0.5 * x * x * lambda) - 1.0).abs();
        assert!(dev < prev);
        prev = dev;
    }
    let p = RegimeParams::short_expiry(0.5f64, 0.1, 3).unwrap();
    assert_eq!(
        p.gamma,
        (4.0 * std::f64::consts::PI.sqrt() * (-0.25f64).exp() / 0.5).ln()
    );
}

#[test]
fn short_expiry_rejects_outside_regime() {
    assert!(matches!(
        Quote::priced(1.0, 0.9, 1.0, 0.05),
        Err(Error::OutsideBand { .. })
    ));
    let q = priced(1.0, 1.1, 1.0, 2.0);
    assert!(matches!(
        implied_vol_short_expiry(&q),
        Err(Error::OutsideRegime { .. })
    ));
}

#[test]
fn large_expiry_round_trip() {
    let x = 0.3f64;
    let mut prev = [f64::INFINITY; 2];
    for t in [200.0, 400.0, 800.0] {
        let q = priced(1.0, x.exp(), t, 0.4);
        // the third-order formula lands at 1.18e-3 for T = 200; one more order is inside 1e-3
        for (slot, order) in [3u32, 4].into_iter().enumerate() {
            let s = implied_vol_large_expiry_order(&q, order).unwrap();
            let err = (s.sigma - 0.4).abs() / 0.4;
            assert!(err < prev[slot], "T={t} M={order}: {err}");
            prev[slot] = err;
            if t == 200.0 {
                assert!(
                    err <= if order == 3 { 1.2e-3 } else { 1e-3 },
                    "M={order}: {err}"
                );
            }
        }
        let s = implied_vol_large_expiry(&q).unwrap();
        let cc = q.covered_call_ratio().unwrap();
        let leading = 2.0 * (-2.0 * cc.ln() / t).sqrt();
        assert!((s.sigma / leading - 1.0).abs() < 0.2);
    }
}

#[test]
fn large_expiry_limit_monotone() {
    let x = 0.3f64;
    let ratios: Vec<f64> = [50.0, 200.0, 800.0]
        .iter()
        .map(|&t| {
            let q = priced(1.0, x.exp(), t, 0.3);
            let cc = q.covered_call_ratio().unwrap();
            implied_vol_large_expiry(&q).unwrap().sigma / (2.0 * (-2.0 * cc.ln() / t).sqrt())
        })
        .collect();
    assert!((ratios[0] - 1.0).abs() > (ratios[1] - 1.0).abs());
    assert!((ratios[1] - 1.0).abs() > (ratios[2] - 1.0).abs());
}

#[test]
fn large_strike_round_trip() {
    let mut prev = f64::INFINITY;
    for x in [4.0f64, 6.0, 8.0] {
        let q = priced(1.0, x.exp(), 1.0, 0.5);
        let s = implied_vol_large_strike(&q, 0.3).unwrap();
        let err = (s.sigma - 0.5).abs() / 0.5;
        assert!(err < prev, "x={x}: {err}");
        if x == 4.0 {
            assert!(err <= 5e-2);
        }
        prev = err;
    }
}

#[test]
fn large_strike_grading() {
    let p = RegimeParams::large_strike(4.0f64, 0.5, 0.05, 3).unwrap();
    let v = p.series(3).unwrap();
    assert_eq!(v.coeff(2, 1), -1.0);
    assert_eq!(v.coeff(2, 0), p.gamma);
}

#[test]
fn atm_series_examples() {
    let q = Quote::priced(1.0, 1.0, 1.0, 0.079_655_7).unwrap();
    let s = implied_vol_atm(&q, 20).unwrap();
    assert!((s.sigma - 0.2).abs() < 1e-6);
    let lead = implied_vol_atm(&q, 1).unwrap();
    assert!((lead.sigma - (2.0 * std::f64::consts::PI).sqrt() * 0.079_655_7).abs() < 1e-15);
    for r in [0.05, 0.1, 0.3, 0.5, 0.7] {
        let q = Quote::priced(1.0, 1.0, 1.0, r).unwrap();
        let s = implied_vol_atm(&q, 40).unwrap();
        assert!((s.sigma - atm_vol_newton(r, 1.0)).abs() < 1e-10, "C/S={r}");
    }
    for r in [0.05, 0.1, 0.3] {
        let q = Quote::priced(1.0, 1.0, 1.0, r).unwrap();
        let s = implied_vol_atm(&q, 25).unwrap();
        assert!((s.sigma - atm_vol_newton(r, 1.0)).abs() < 1e-10, "C/S={r}");
    }
}

#[test]
fn short_expiry_seed_error_scales_like_lambda_cubed() {
    let x = 0.5f64;
    let scaled: Vec<f64> = [0.2, 0.1, 0.05, 0.025]
        .iter()
        .map(|&theta: &f64| {
            let q = priced(1.0, x.exp(), 1.0, theta);
            let s = implied_vol_short_expiry(&q).unwrap();
            let v_exact = 2.0 * theta * theta / (x * x);
            let v_approx = 2.0 * s.theta_sq / (x * x);
            (v_approx - v_exact).abs() / s.lambda.unwrap().powi(3)
        })
        .collect();
    assert!(
        scaled[2] <= scaled[1] && scaled[3] <= scaled[2],
        "{scaled:?}"
    );
}

#[test]
fn third_order_terms_have_lambda_cubed_log_squared_size() {
    let (beta, gamma, alpha1) = (1.5f64, 2.1, -1.52);
    for i in 0..=20 {
        let lambda = 0.01 * (10f64).powf(i as f64 / 20.0);
        let full = invert_fifth_order(lambda, beta, gamma, alpha1).unwrap();
        let l = lambda.ln();
        let second = lambda - beta * lambda * lambda * l + gamma * lambda * lambda;
        let ratio = (full - second).abs() / (lambda.powi(3) * l * l);
        assert!(ratio > 0.5 && ratio < 10.0, "λ={lambda}: {ratio}");
    }
}

#[test]
fn newton_refine_examples() {
    let q = priced(1.0, 0.5f64.exp(), 1.0, 0.1);
    let exact = implied_vol_exact(&q, 1e-14).unwrap();
    assert_eq!(newton_refine(&q, exact, 1e-12).unwrap().iterations, 0);

    let seed = implied_vol_short_expiry(&q).unwrap().sigma;
    let r = newton_refine(&q, seed, 1e-12).unwrap();
    assert!(r.iterations <= 5, "{}", r.iterations);
    assert!((r.sigma - exact).abs() <= 1e-12);

    let far = newton_refine(&q, 10.0 * exact, 1e-12).unwrap();
    assert!((far.sigma - exact).abs() <= 1e-12);
    let low = newton_refine(&q, 0.01 * exact, 1e-12).unwrap();
    assert!((low.sigma - exact).abs() <= 1e-12);
}

#[test]
fn auto_dispatch() {
    let short = implied_vol_auto(&priced(1.0, 1.2, 0.01, 0.2)).unwrap();
    assert_eq!(short.regime, Some(ExpansionRegime::ShortMaturity));
    let long = implied_vol_auto(&priced(1.0, 0.1f64.exp(), 300.0, 0.3)).unwrap();
    assert_eq!(long.regime, Some(ExpansionRegime::LargeMaturity));
    let atm = implied_vol_auto(&priced(1.0, 1.0, 1.0, 0.3)).unwrap();
    assert_eq!(atm.regime, Some(ExpansionRegime::AtmSmall));
    let wing = implied_vol_auto(&priced(1.0, 6f64.exp(), 1.0, 1.0)).unwrap();
    assert_eq!(wing.regime, Some(ExpansionRegime::LargeStrike));
    assert!((wing.sigma - 1.0).abs() < 1e-12);
}

/// 200 quotes over θ ∈ [0.05, 8] and x ∈ [-2, 2]. Quotes whose price rounds
/// onto the band edge, or whose volatility is not resolvable because half an
/// ulp of the price exceeds `1e-10·vega`, are skipped.
#[test]
fn auto_matches_oracle_on_grid() {
    let mut checked = 0;
    for i in 0..20 {
        for j in 0..10 {
            let theta = 0.05 * 160f64.powf(i as f64 / 19.0);
            let x = -2.0 + 4.0 * j as f64 / 9.0;
            let q = priced(1.0, x.exp(), 1.0, theta);
            if q.require_interior_price().is_err() {
                continue;
            }
            let price = q.call_price().unwrap();
            if 0.5 * price * f64::EPSILON / vega(&q, theta) > 1e-10 {
                continue;
            }
            let s = implied_vol_auto(&q).unwrap();
            let oracle = implied_vol_exact(&q, 1e-12).unwrap();
            assert!((s.sigma - oracle).abs() <= 1e-10, "x={x} θ={theta}");
            if s.lambda.is_some_and(|l| l <= 0.2) {
                assert!(
                    s.seed_rel_error(oracle) <= 0.1,
                    "x={x} θ={theta}: {}",
                    s.seed_rel_error(oracle)
                );
            }
            checked += 1;
        }
    }
    assert!(checked >= 170, "{checked}");
}

#[test]
fn options_select_paths() {
    let q = priced(100.0, 110.0, 0.25, 0.2);
    let raw = implied_vol(
        &q,
        &ImpliedOptions {
            regime: RegimeChoice::Short,
            refine: false,
            ..Default::default()
        },
    )
    .unwrap();
    assert!(!raw.refined && raw.iterations == 0);
    let exact = implied_vol(
        &q,
        &ImpliedOptions {
            regime: RegimeChoice::Exact,
            ..Default::default()
        },
    )
    .unwrap();
    assert!((exact.sigma - 0.2).abs() < 1e-12);
    let higher = implied_vol(
        &q,
        &ImpliedOptions {
            order: Some(6),
            refine: false,
            ..Default::default()
        },
    )
    .unwrap();
    assert_eq!(higher.order_used, 6);
    let atm = implied_vol(
        &q,
        &ImpliedOptions {
            regime: RegimeChoice::Atm,
            ..Default::default()
        },
    );
    assert_eq!(atm.unwrap_err(), Error::RouteToWings);
    let bad = Quote::priced(100.0, 110.0, 0.25, 100.0).unwrap();
    assert!(implied_vol(&bad, &ImpliedOptions::default())
        .unwrap_err()
        .is_domain());
}

#[test]
fn single_precision_inversion() {
    let q = MarketQuote::<f32>::new(1.0, 0.5f32.exp(), 0.05).unwrap();
    let q = q.with_price(bs_call_price(&q, 0.2f32)).unwrap();
    let s = implied_vol_short_expiry(&q).unwrap();
    assert!((s.sigma - 0.2).abs() < 5e-3);
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn refinement_is_idempotent(x in -1.0f64..1.0, t in 0.05f64..5.0, sigma in 0.1f64..1.0) {
        let q = priced(1.0, x.exp(), t, sigma);
        prop_assume!(q.require_interior_price().is_ok());
        let once = newton_refine(&q, 0.5, 1e-11).unwrap();
        let twice = newton_refine(&q, once.sigma, 1e-11).unwrap();
        prop_assert!((once.sigma - twice.sigma).abs() <= 1e-15);
    }

    #[test]
    fn refined_residual_within_tolerance(x in -2.0f64..2.0, t in 0.05f64..10.0, sigma in 0.05f64..1.5) {
        let q = priced(1.0, x.exp(), t, sigma);
        prop_assume!(q.require_interior_price().is_ok());
        let s = implied_vol_auto(&q).unwrap();
        prop_assert!(s.refined);
        prop_assert!(s.residual.abs() <= 1e-12);
    }
}
