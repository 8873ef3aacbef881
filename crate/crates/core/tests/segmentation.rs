mod common;

use coresat_core::pipeline::{segment_metric, segment_universe, SegmentationSettings};
use coresat_core::rbf::RbfModel;
use coresat_core::segmentation::{
    core_block, core_block_size, detect_kink, ecdf_upper_triangle, intersect, threshold, EcdfCurve,
    LOWER_KINK_WINDOW, UPPER_KINK_WINDOW,
};
use coresat_core::{Error, LocalMetric};
use proptest::prelude::*;

/// ECDF whose curve `value -> probability` rises with slope 5 up to
/// `p = 0.75` and with slope 0.5 afterwards.
fn two_slope(k: usize) -> EcdfCurve {
    let values = (1..=k)
        .map(|i| {
            let p = i as f64 / k as f64;
            if p <= 0.75 {
                p / 5.0
            } else {
                0.15 + (p - 0.75) / 0.5
            }
        })
        .collect();
    EcdfCurve::from_values(values).unwrap()
}

#[test]
fn two_slope_kink() {
    for k in [200, 351, 1000, 5000] {
        let kink = detect_kink(&two_slope(k), UPPER_KINK_WINDOW).unwrap();
        assert!((kink.p - 0.75).abs() <= 0.01, "K = {k}: p = {}", kink.p);
        assert_eq!(threshold(&two_slope(k), kink.p).unwrap(), kink.value);
    }
}

#[test]
fn ecdf_matches_sort_oracle() {
    let s = common::seriated_fixture(LocalMetric::SquaredEuclidean);
    let c = ecdf_upper_triangle(&s).unwrap();
    assert_eq!(c.len(), 351);
    let mut oracle = Vec::new();
    for i in 0..27 {
        for j in i + 1..27 {
            oracle.push(s.get(i, j));
        }
    }
    oracle.sort_by(|a, b| a.partial_cmp(b).unwrap());
    assert_eq!(c.values(), &oracle[..]);
    let probs = c.probabilities();
    assert_eq!(*probs.last().unwrap(), 1.0);
    assert!(probs.windows(2).all(|w| w[0] < w[1]));
}

fn flat_model(height: f64) -> RbfModel {
    RbfModel::from_parts(vec![[0.0, 0.0]], vec![0.0], 1.0, Some(height), 0.0).unwrap()
}

#[test]
fn flat_surfaces() {
    let s = common::seriated_fixture(LocalMetric::Euclidean);
    let all = core_block(&flat_model(0.1), &s, 0.357, 0.75).unwrap();
    assert_eq!(all.core_ids.len(), 27);
    let none = core_block(&flat_model(0.9), &s, 0.357, 0.75).unwrap();
    assert!(none.is_empty());
}

#[test]
fn planted_block_is_recovered_per_metric() {
    let u = common::planted_universe(common::FIXTURE_SEED);
    let out = segment_universe(&u, &SegmentationSettings::default()).unwrap();
    for m in &out.per_metric {
        let k = m.core.core_ids.len();
        assert!((19..=21).contains(&k), "{}: k* = {k}", m.core.metric);
        let kink = m.kink.unwrap();
        assert!((0.6..=0.9).contains(&kink.p));
    }
    let planted = out.result.intersection_core.iter().filter(|id| id.starts_with('C')).count();
    let outsiders = out.result.intersection_core.len() - planted;
    assert!(planted >= 18 && outsiders <= 1, "{:?}", out.result.intersection_core);
}

#[test]
fn lower_kink_gives_a_tighter_core() {
    let u = common::planted_universe(common::FIXTURE_SEED);
    let upper = segment_universe(&u, &SegmentationSettings::default()).unwrap();
    let lower = segment_universe(
        &u,
        &SegmentationSettings {
            kink_window: LOWER_KINK_WINDOW,
            ..Default::default()
        },
    )
    .unwrap();
    for (lo, hi) in lower.per_metric.iter().zip(&upper.per_metric) {
        assert!(lo.core.d_bound <= hi.core.d_bound);
        assert!(lo.core.core_ids.len() <= hi.core.core_ids.len());
    }
}

#[test]
fn fixed_p_bypasses_detection() {
    let s = common::seriated_fixture(LocalMetric::Manhattan);
    let settings = SegmentationSettings {
        fixed_p: vec![(LocalMetric::Manhattan, 0.7)],
        ..Default::default()
    };
    let out = segment_metric(s.to_distance_matrix(), &settings).unwrap();
    assert!(out.kink.is_none());
    assert_eq!(out.core.p_used, 0.7);
    assert_eq!(out.core.d_bound, threshold(&out.ecdf, 0.7).unwrap());
}

#[test]
fn flat_distances_have_no_kink() {
    let s = common::seriated_fixture(LocalMetric::Manhattan);
    let labels = s.labels.clone();
    let n = labels.len();
    let values = (0..n * n).map(|k| if k / n == k % n { 0.0 } else { 1.0 }).collect();
    let d = coresat_core::DistanceMatrix::from_rows(labels, LocalMetric::Manhattan, values).unwrap();
    assert!(matches!(
        segment_metric(d, &SegmentationSettings::default()),
        Err(Error::NoKink { .. })
    ));
}

#[test]
fn intersection_is_bounded_by_every_core() {
    let u = common::planted_universe(common::FIXTURE_SEED + 1);
    let settings = SegmentationSettings {
        fixed_p: LocalMetric::ALL.iter().map(|&m| (m, 0.75)).collect(),
        ..Default::default()
    };
    let out = segment_universe(&u, &settings).unwrap();
    let r = &out.result;
    for id in &r.intersection_core {
        assert!(r.per_metric.iter().all(|c| c.contains(id)));
    }
    let smallest = r.per_metric.iter().map(|c| c.core_ids.len()).min().unwrap();
    assert!(r.intersection_core.len() <= smallest);
    assert_eq!(r.intersection_core.len() + r.satellite.len(), u.len());
    assert!(r.satellite.iter().all(|id| !r.is_core(id)));
    let again = intersect(&r.universe, r.per_metric.clone()).unwrap();
    assert_eq!(&again, r);
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(100))]

    #[test]
    fn quantile_consistency(values in proptest::collection::vec(0.0..1.0f64, 1..300), p in 0.001..1.0f64) {
        let c = EcdfCurve::from_values(values).unwrap();
        let d = threshold(&c, p).unwrap();
        prop_assert!(c.evaluate(d) >= p - 1e-9);
        let below = c.values().iter().copied().filter(|&v| v < d).fold(f64::NEG_INFINITY, f64::max);
        if below.is_finite() {
            prop_assert!(c.evaluate(below) < p);
        }
    }

    #[test]
    fn core_grows_with_the_bound(seed in 0u64..1000, lo in 0.0..1.0f64, hi in 0.0..1.0f64) {
        let (lo, hi) = if lo <= hi { (lo, hi) } else { (hi, lo) };
        let u = common::small_universe(seed, 10);
        let settings = SegmentationSettings {
            fixed_p: LocalMetric::ALL.iter().map(|&m| (m, 0.75)).collect(),
            ..Default::default()
        };
        let out = segment_universe(&u, &settings).unwrap();
        for m in &out.per_metric {
            let n = m.seriated.len();
            prop_assert!(core_block_size(&m.model, n, lo) <= core_block_size(&m.model, n, hi));
        }
    }
}
