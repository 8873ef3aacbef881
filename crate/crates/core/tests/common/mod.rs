#![allow(dead_code)]

use coresat_core::stable::StableSampler;
use coresat_core::stats::{build_sample_series, AssetReturns, DEFAULT_ALPHA_FLOOR};
use coresat_core::SampleVectorSeries;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

pub fn uniform(rng: &mut ChaCha8Rng) -> f64 {
    loop {
        let u: f64 = rng.random();
        if u > 0.0 && u < 1.0 {
            return u;
        }
    }
}

/// `n` draws of a standard symmetric stable law with the given alpha.
pub fn stable_draws(rng: &mut ChaCha8Rng, alpha: f64, n: usize) -> Vec<f64> {
    let s = StableSampler::new(alpha, 0.0, 1.0, 0.0).unwrap();
    (0..n).map(|_| s.sample(|| uniform(rng))).collect()
}

/// Yearly (mean %, std %, alpha) parameters driving one simulated asset.
#[derive(Clone, Copy)]
pub struct YearParams {
    pub mean_pct: f64,
    pub std_pct: f64,
    pub alpha: f64,
}

/// Seed of the planted universe used by the fixed-fixture tests.
pub const FIXTURE_SEED: u64 = 14;

/// Published yearly sample vectors, 2014 to 2019.
/// (mean %, std %, alpha) of one year.
pub type Row = (f64, f64, f64);

pub const PUBLISHED: [(&str, [Row; 6]); 4] = [
    ("DMD", [(-4.52, 28.12, 1.81), (1.67, 22.96, 1.18), (-0.73, 9.65, 2.00), (8.46, 20.00, 2.00), (-5.50, 14.37, 1.30), (0.85, 16.48, 2.00)]),
    ("FRC", [(-7.10, 18.74, 2.00), (-1.62, 20.27, 1.44), (-0.25, 59.19, 0.63), (5.92, 44.84, 1.18), (-1.97, 29.43, 1.51), (5.05, 104.04, 0.90)]),
    ("XPM", [(-7.27, 15.58, 1.67), (-0.38, 24.28, 1.65), (-0.58, 8.66, 1.79), (5.38, 26.47, 1.63), (-2.98, 22.84, 1.76), (0.70, 13.35, 1.57)]),
    ("ZET", [(-5.74, 28.72, 1.65), (0.16, 24.63, 1.68), (0.51, 16.39, 1.72), (2.88, 35.35, 1.74), (-3.73, 20.14, 1.83), (1.11, 24.01, 1.80)]),
];

pub const WEEKS: [usize; 6] = [52, 52, 52, 52, 52, 21];

/// Shared yearly (mean %, std %, alpha) of the planted core, after the
/// XPM/ZET rows of the published sample vectors but with near-normal tails.
pub const CORE_DYNAMICS: [(f64, f64, f64); 6] = [
    (-6.5, 22.0, 1.95),
    (-0.1, 24.5, 1.95),
    (0.0, 12.5, 2.0),
    (4.1, 31.0, 1.95),
    (-3.4, 21.5, 2.0),
    (0.9, 18.7, 1.95),
];

/// DMD row of the published sample vectors with its alpha dips and spread
/// swings exaggerated.
pub const DMD: [(f64, f64, f64); 6] = [
    (-1.5, 45.0, 1.81),
    (4.5, 22.96, 0.9),
    (-3.5, 6.0, 2.00),
    (11.5, 12.0, 2.00),
    (-9.0, 45.0, 0.9),
    (3.5, 8.0, 2.00),
];
pub const FRC: [(f64, f64, f64); 6] = PUBLISHED[1].1;

/// Further divergent dynamics in the spirit of the two published rows.
pub const OTHER_OUTSIDERS: [[(f64, f64, f64); 6]; 5] = [
    [(2.0, 45.0, 1.1), (-6.0, 60.0, 0.9), (3.0, 35.0, 1.9), (12.0, 70.0, 1.0), (-8.0, 40.0, 1.9), (-2.0, 50.0, 1.0)],
    [(-9.0, 10.0, 1.3), (4.0, 12.0, 2.0), (-5.0, 40.0, 0.8), (2.0, 15.0, 2.0), (6.0, 55.0, 0.9), (3.0, 9.0, 1.4)],
    [(6.0, 35.0, 2.0), (5.0, 50.0, 2.0), (-6.0, 65.0, 1.1), (-2.0, 25.0, 0.8), (9.0, 30.0, 1.1), (-6.0, 70.0, 2.0)],
    [(-1.0, 70.0, 0.9), (-8.0, 15.0, 1.6), (7.0, 20.0, 1.0), (15.0, 90.0, 1.5), (-1.0, 12.0, 0.8), (8.0, 40.0, 1.2)],
    [(3.0, 12.0, 2.0), (9.0, 80.0, 0.8), (-9.0, 30.0, 1.4), (0.0, 45.0, 2.0), (-10.0, 85.0, 1.0), (1.0, 25.0, 1.7)],
];

pub fn outsider_params(k: usize) -> Vec<YearParams> {
    let base = match k {
        0 => &DMD,
        1 => &FRC,
        k => &OTHER_OUTSIDERS[k - 2],
    };
    base.iter()
        .map(|&(m, s, a)| YearParams {
            mean_pct: m,
            std_pct: s,
            alpha: a,
        })
        .collect()
}

/// Weekly log returns for one asset following yearly parameters.
pub fn simulate_returns(rng: &mut ChaCha8Rng, years: &[YearParams]) -> Vec<f64> {
    let mut out = Vec::new();
    for (p, &n) in years.iter().zip(&WEEKS) {
        let scale = p.std_pct / 100.0 / std::f64::consts::SQRT_2;
        let s = StableSampler::new(p.alpha, 0.0, scale, p.mean_pct / 100.0).unwrap();
        out.extend((0..n).map(|_| s.sample(|| uniform(rng)).clamp(-2.5, 2.5)));
    }
    out
}

pub fn week_years() -> Vec<i32> {
    WEEKS
        .iter()
        .enumerate()
        .flat_map(|(k, &n)| std::iter::repeat_n(2014 + k as i32, n))
        .collect()
}

/// 20 assets sharing one dynamic (with small parameter noise) followed by 7
/// divergent assets.
pub fn planted_universe(seed: u64) -> Vec<SampleVectorSeries> {
    let mut rng = rng(seed);
    let mut returns = Vec::new();
    for k in 0..20 {
        let params: Vec<YearParams> = CORE_DYNAMICS
            .iter()
            .map(|&(m, s, a)| YearParams {
                mean_pct: m + rng.random_range(-0.3..0.3),
                std_pct: s * (1.0 + rng.random_range(-0.05..0.05)),
                alpha: (a + rng.random_range(-0.03..0.03)).min(2.0),
            })
            .collect();
        returns.push((format!("C{k:02}"), simulate_returns(&mut rng, &params)));
    }
    for k in 0..7 {
        returns.push((format!("S{k}"), simulate_returns(&mut rng, &outsider_params(k))));
    }
    let years = week_years();
    let assets: Vec<AssetReturns> = returns
        .iter()
        .map(|(id, r)| AssetReturns { asset_id: id, returns: r })
        .collect();
    build_sample_series(&assets, &years, DEFAULT_ALPHA_FLOOR)
        .unwrap()
        .into_iter()
        .map(|f| f.series)
        .collect()
}

/// Seriated distance matrix of the fixture universe under one metric.
pub fn seriated_fixture(metric: coresat_core::LocalMetric) -> coresat_core::SeriatedMatrix {
    let u = planted_universe(FIXTURE_SEED);
    let z = coresat_core::dtw::standardize_panel(&u).unwrap();
    let d = coresat_core::dtw::pairwise_matrix(&z, metric).unwrap();
    coresat_core::seriation::seriate(&d).unwrap()
}

/// `n` assets with independent random yearly vectors over six years.
pub fn small_universe(seed: u64, n: usize) -> Vec<SampleVectorSeries> {
    let mut rng = rng(seed);
    (0..n)
        .map(|k| {
            let vectors = (0..6)
                .map(|t| coresat_core::SampleVector {
                    year: 2014 + t,
                    mean_return: rng.random_range(-10.0..10.0),
                    std_dev: rng.random_range(5.0..100.0),
                    tail_alpha: rng.random_range(0.5..2.0),
                })
                .collect();
            SampleVectorSeries::new(format!("R{k:02}"), vectors).unwrap()
        })
        .collect()
}
