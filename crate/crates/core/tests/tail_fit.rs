mod common;

use coresat_core::stats::{
    annual_buckets, build_sample_series, fit_tail_alpha, fit_tail_alpha_with_floor, mean_and_std,
    AlphaClamp, AssetReturns, DEFAULT_ALPHA_FLOOR,
};
use coresat_core::{Error, StableParams};
use proptest::prelude::*;

fn median(mut v: Vec<f64>) -> f64 {
    v.sort_by(f64::total_cmp);
    let n = v.len();
    if n % 2 == 1 {
        v[n / 2]
    } else {
        0.5 * (v[n / 2 - 1] + v[n / 2])
    }
}

#[test]
fn normal_draws_fit_near_two() {
    let mut rng = common::rng(11);
    let x = common::stable_draws(&mut rng, 2.0, 10_000);
    let a = fit_tail_alpha(&x).unwrap().alpha;
    assert!((1.9..=2.0).contains(&a), "alpha = {a}");
}

#[test]
fn cauchy_draws_fit_near_one() {
    let mut rng = common::rng(12);
    let x = common::stable_draws(&mut rng, 1.0, 10_000);
    let a = fit_tail_alpha(&x).unwrap().alpha;
    assert!((0.9..=1.1).contains(&a), "alpha = {a}");
}

#[test]
fn alpha_recovery_on_short_buckets() {
    let mut rng = common::rng(13);
    for truth in [1.2, 1.5, 1.9] {
        let errors: Vec<f64> = (0..200)
            .map(|_| {
                let x = common::stable_draws(&mut rng, truth, 52);
                (fit_tail_alpha(&x).unwrap().alpha - truth).abs()
            })
            .collect();
        let m = median(errors);
        assert!(m <= 0.25, "alpha {truth}: median error {m}");
    }
}

#[test]
fn fits_stay_in_range() {
    let mut rng = common::rng(14);
    for alpha in [0.4, 0.7, 1.0, 1.5, 2.0] {
        for _ in 0..50 {
            let x = common::stable_draws(&mut rng, alpha, 30);
            let fit = fit_tail_alpha(&x).unwrap();
            assert!(fit.alpha <= 2.0 && fit.alpha >= DEFAULT_ALPHA_FLOOR);
            let fit = fit_tail_alpha_with_floor(&x, 0.8).unwrap();
            assert!(fit.alpha >= 0.8);
            if fit.alpha == 0.8 {
                assert!(fit.clamp.is_some());
            }
        }
    }
}

#[test]
fn near_normal_year_reports_ceiling() {
    // evenly spread values have lighter tails than the normal law
    let x: Vec<f64> = (0..52).map(|k| k as f64 / 51.0 - 0.5).collect();
    let fit = fit_tail_alpha(&x).unwrap();
    assert_eq!(fit.alpha, 2.0);
    assert_eq!(fit.clamp, Some(AlphaClamp::Ceiling));
}

#[test]
fn degenerate_bucket() {
    assert_eq!(fit_tail_alpha(&[0.01; 20]), Err(Error::DegenerateBucket));
    assert!(fit_tail_alpha(&[0.01, 0.02, 0.03]).is_err());
}

#[test]
fn mean_of_normal_draws() {
    let mut rng = common::rng(15);
    // N(0, 2%): the symmetric stable law with alpha 2 and scale s / sqrt 2
    let x: Vec<f64> = common::stable_draws(&mut rng, 2.0, 52)
        .into_iter()
        .map(|v| v * 0.02 / std::f64::consts::SQRT_2)
        .collect();
    let (mean, _) = mean_and_std(&x).unwrap();
    assert!(mean.abs() <= 3.0 * 2.0 / 52f64.sqrt());
}

#[test]
fn two_point_bucket() {
    let (m, s) = mean_and_std(&[0.01, -0.01]).unwrap();
    assert!(m.abs() < 1e-15);
    assert!((s - 2f64.sqrt()).abs() < 1e-12);
}

#[test]
fn normal_limit_of_the_characteristic_function() {
    let p = StableParams::new(2.0, 0.3, 0.7, 0.1).unwrap();
    let sigma = p.normal_sigma().unwrap();
    assert!((sigma - 2f64.sqrt() * 0.7).abs() < 1e-15);
    for t in [-2.0, -0.5, 0.0, 0.3, 1.7] {
        let (re, im) = p.characteristic_function(t);
        let modulus = (-(sigma * t).powi(2) / 2.0).exp();
        assert!((re - modulus * (0.1 * t).cos()).abs() < 1e-12);
        assert!((im - modulus * (0.1 * t).sin()).abs() < 1e-12);
    }
    assert!(StableParams::new(1.5, 0.0, 1.0, 0.0).unwrap().normal_sigma().is_none());
}

#[test]
fn degenerate_year_names_asset_and_year() {
    let years: Vec<i32> = (0..20).map(|k| 2014 + k / 10).collect();
    let good: Vec<f64> = (0..20).map(|k| ((k * 7 % 11) as f64 - 5.0) / 100.0).collect();
    let mut bad = good.clone();
    bad[10..].iter_mut().for_each(|v| *v = 0.01);
    let assets = [
        AssetReturns { asset_id: "GOOD", returns: &good },
        AssetReturns { asset_id: "BAD", returns: &bad },
    ];
    let err = build_sample_series(&assets, &years, DEFAULT_ALPHA_FLOOR).unwrap_err();
    let msg = err.to_string();
    assert!(msg.contains("BAD") && msg.contains("2015"), "{msg}");
}

#[test]
fn single_asset_two_years() {
    let years: Vec<i32> = (0..20).map(|k| 2014 + k / 10).collect();
    let r: Vec<f64> = (0..20).map(|k| ((k * 7 % 11) as f64 - 5.0) / 100.0).collect();
    let out = build_sample_series(&[AssetReturns { asset_id: "A", returns: &r }], &years, 0.5).unwrap();
    assert_eq!(out.len(), 1);
    assert_eq!(out[0].series.len(), 2);
    assert_eq!(out[0].fits.len(), 2);
}

#[test]
fn planted_universe_has_six_years_per_asset() {
    let u = common::planted_universe(common::FIXTURE_SEED);
    assert_eq!(u.len(), 27);
    assert!(u.iter().all(|s| s.len() == 6 && s.first_year() == 2014));
    let buckets = annual_buckets(&common::week_years(), &vec![0.0; 281]).unwrap();
    let sizes: Vec<usize> = buckets.iter().map(|b| b.returns.len()).collect();
    assert_eq!(sizes, common::WEEKS);
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(200))]

    #[test]
    fn scale_equivariance(seed in any::<u64>(), c in 0.01..100.0f64) {
        let mut rng = common::rng(seed);
        let x = common::stable_draws(&mut rng, 1.6, 52);
        let y: Vec<f64> = x.iter().map(|v| v * c).collect();
        let (fx, fy) = (fit_tail_alpha(&x).unwrap(), fit_tail_alpha(&y).unwrap());
        prop_assert!((fx.alpha - fy.alpha).abs() < 1e-9);
        let (_, sx) = mean_and_std(&x).unwrap();
        let (_, sy) = mean_and_std(&y).unwrap();
        prop_assert!((sy - c * sx).abs() <= 1e-9 * sy.max(1.0));
    }

    #[test]
    fn shift_invariance(seed in any::<u64>(), shift in -0.5..0.5f64) {
        let mut rng = common::rng(seed);
        let x: Vec<f64> = common::stable_draws(&mut rng, 1.6, 52).iter().map(|v| v * 0.05).collect();
        let y: Vec<f64> = x.iter().map(|v| v + shift).collect();
        let (fx, fy) = (fit_tail_alpha(&x).unwrap(), fit_tail_alpha(&y).unwrap());
        prop_assert!((fx.alpha - fy.alpha).abs() < 1e-6);
        let (mx, sx) = mean_and_std(&x).unwrap();
        let (my, sy) = mean_and_std(&y).unwrap();
        prop_assert!((sx - sy).abs() < 1e-9);
        prop_assert!((my - mx - 100.0 * shift).abs() < 1e-9);
    }
}
