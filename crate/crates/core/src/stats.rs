//! Yearly sample vectors `(mean return, standard deviation, tail alpha)`.
//!
//! The tail parameter is fitted with McCulloch's quantile estimator: the
//! spread ratio `(q95 - q05) / (q75 - q25)` and the skew ratio
//! `(q95 + q05 - 2 q50) / (q95 - q05)` are mapped to alpha through his
//! published lookup table with bilinear interpolation.

use alloc::string::String;
use alloc::vec::Vec;

use crate::error::{Error, Result};

/// Minimum number of weekly returns needed to fit alpha for one year.
pub const MIN_BUCKET_LEN: usize = 8;

/// Default lower bound reported for a fitted alpha.
pub const DEFAULT_ALPHA_FLOOR: f64 = 0.5;

/// Upper bound of the stable tail parameter (the normal law).
pub const ALPHA_CEILING: f64 = 2.0;

#[derive(Debug, Clone, Copy, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct SampleVector {
    pub year: i32,
    /// Mean weekly log return, percent.
    pub mean_return: f64,
    /// Sample standard deviation of weekly log returns, percent.
    pub std_dev: f64,
    pub tail_alpha: f64,
}

impl SampleVector {
    pub fn as_array(&self) -> [f64; 3] {
        [self.mean_return, self.std_dev, self.tail_alpha]
    }
}

/// Yearly sample vectors of one asset over contiguous years.
#[derive(Debug, Clone, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct SampleVectorSeries {
    pub asset_id: String,
    vectors: Vec<SampleVector>,
}

impl SampleVectorSeries {
    /// Validates that years are contiguous, strictly increasing and that at
    /// least two of them are present.
    pub fn new(asset_id: impl Into<String>, vectors: Vec<SampleVector>) -> Result<Self> {
        let asset_id = asset_id.into();
        if vectors.len() < 2 {
            return Err(Error::InvalidParameter {
                name: "series length",
                value: vectors.len() as f64,
                expected: "at least 2 years",
            }
            .in_asset(&asset_id, None));
        }
        for w in vectors.windows(2) {
            if w[1].year != w[0].year + 1 {
                return Err(Error::YearMismatch {
                    left: w[0].year,
                    right: w[1].year,
                }
                .in_asset(&asset_id, Some(w[1].year)));
            }
        }
        for v in &vectors {
            if !(v.std_dev >= 0.0) || !(v.tail_alpha > 0.0 && v.tail_alpha <= ALPHA_CEILING) {
                return Err(Error::InvalidParameter {
                    name: "sample vector",
                    value: v.tail_alpha,
                    expected: "std >= 0 and 0 < alpha <= 2",
                }
                .in_asset(&asset_id, Some(v.year)));
            }
        }
        Ok(Self { asset_id, vectors })
    }

    pub fn vectors(&self) -> &[SampleVector] {
        &self.vectors
    }

    pub fn len(&self) -> usize {
        self.vectors.len()
    }

    pub fn is_empty(&self) -> bool {
        self.vectors.is_empty()
    }

    pub fn first_year(&self) -> i32 {
        self.vectors[0].year
    }

    pub fn points(&self) -> Vec<[f64; 3]> {
        self.vectors.iter().map(SampleVector::as_array).collect()
    }

    /// Same asset and years, new values. Used by standardisation.
    pub(crate) fn with_points(&self, points: &[[f64; 3]]) -> Self {
        let vectors = self
            .vectors
            .iter()
            .zip(points)
            .map(|(v, p)| SampleVector {
                year: v.year,
                mean_return: p[0],
                std_dev: p[1],
                tail_alpha: p[2],
            })
            .collect();
        Self {
            asset_id: self.asset_id.clone(),
            vectors,
        }
    }
}

/// Parameters of a stable law in Nolan's S(alpha, beta, gamma, delta; 0)
/// parametrisation.
#[derive(Debug, Clone, Copy, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct StableParams {
    pub alpha: f64,
    pub beta: f64,
    pub gamma: f64,
    pub delta: f64,
}

impl StableParams {
    pub fn new(alpha: f64, beta: f64, gamma: f64, delta: f64) -> Result<Self> {
        if !(alpha > 0.0 && alpha <= 2.0) {
            return Err(Error::InvalidParameter {
                name: "alpha",
                value: alpha,
                expected: "(0, 2]",
            });
        }
        if !(-1.0..=1.0).contains(&beta) {
            return Err(Error::InvalidParameter {
                name: "beta",
                value: beta,
                expected: "[-1, 1]",
            });
        }
        if !(gamma > 0.0) {
            return Err(Error::InvalidParameter {
                name: "gamma",
                value: gamma,
                expected: "> 0",
            });
        }
        if !delta.is_finite() {
            return Err(Error::InvalidParameter {
                name: "delta",
                value: delta,
                expected: "finite",
            });
        }
        Ok(Self {
            alpha,
            beta,
            gamma,
            delta,
        })
    }

    /// `E[exp(i t X)]` as `(re, im)`.
    pub fn characteristic_function(&self, t: f64) -> (f64, f64) {
        let gt = libm::fabs(self.gamma * t);
        let sign = if t > 0.0 {
            1.0
        } else if t < 0.0 {
            -1.0
        } else {
            0.0
        };
        // exponent = i*delta*t - |gt|^a * (1 + i*beta*sign*w)
        let (magnitude, skew) = if self.alpha == 1.0 {
            let w = if gt > 0.0 {
                2.0 / core::f64::consts::PI * libm::log(gt)
            } else {
                0.0
            };
            (gt, self.beta * sign * w)
        } else {
            let ga = libm::pow(gt, self.alpha);
            let w = libm::tan(core::f64::consts::FRAC_PI_2 * self.alpha)
                * (libm::pow(gt, 1.0 - self.alpha) - 1.0);
            (ga, if gt > 0.0 { self.beta * sign * w } else { 0.0 })
        };
        let re_exp = -magnitude;
        let im_exp = self.delta * t - magnitude * skew;
        let scale = libm::exp(re_exp);
        (scale * libm::cos(im_exp), scale * libm::sin(im_exp))
    }

    /// Standard deviation of the equivalent normal law when `alpha == 2`.
    pub fn normal_sigma(&self) -> Option<f64> {
        (self.alpha == 2.0).then_some(core::f64::consts::SQRT_2 * self.gamma)
    }
}

/// Weekly returns of one calendar year.
#[derive(Debug, Clone, PartialEq)]
pub struct YearBucket {
    pub year: i32,
    pub returns: Vec<f64>,
}

/// Groups weekly returns by the calendar year of their week-end date.
///
/// `years[t]` is the year of the week ending return `returns[t]`; years must
/// be non-decreasing.
pub fn annual_buckets(years: &[i32], returns: &[f64]) -> Result<Vec<YearBucket>> {
    if returns.is_empty() {
        return Err(Error::Empty("return series"));
    }
    if years.len() != returns.len() {
        return Err(Error::LengthMismatch {
            left: years.len(),
            right: returns.len(),
        });
    }
    let mut buckets: Vec<YearBucket> = Vec::new();
    for (&year, &r) in years.iter().zip(returns) {
        match buckets.last_mut() {
            Some(b) if b.year == year => b.returns.push(r),
            Some(b) if year < b.year => {
                return Err(Error::YearMismatch {
                    left: b.year,
                    right: year,
                })
            }
            _ => buckets.push(YearBucket {
                year,
                returns: alloc::vec![r],
            }),
        }
    }
    for b in &buckets {
        if b.returns.len() < MIN_BUCKET_LEN {
            return Err(Error::TooFewObservations {
                year: b.year,
                needed: MIN_BUCKET_LEN,
                got: b.returns.len(),
            });
        }
    }
    Ok(buckets)
}

/// Arithmetic mean and sample standard deviation (n - 1 denominator), both in
/// percent.
pub fn mean_and_std(bucket: &[f64]) -> Result<(f64, f64)> {
    if bucket.len() < 2 {
        return Err(Error::InvalidParameter {
            name: "bucket length",
            value: bucket.len() as f64,
            expected: ">= 2",
        });
    }
    let n = bucket.len() as f64;
    // shifted by the first value so a constant bucket has exactly zero spread
    let origin = bucket[0];
    let shift = bucket.iter().map(|x| x - origin).sum::<f64>() / n;
    let ss: f64 = bucket
        .iter()
        .map(|x| (x - origin - shift) * (x - origin - shift))
        .sum();
    Ok((100.0 * (origin + shift), 100.0 * libm::sqrt(ss / (n - 1.0))))
}

/// Quantile of sorted data by linear interpolation between order statistics
/// (`h = (n - 1) q`).
pub fn quantile_sorted(sorted: &[f64], q: f64) -> f64 {
    debug_assert!(!sorted.is_empty());
    let h = (sorted.len() - 1) as f64 * q;
    let lo = libm::floor(h) as usize;
    let hi = (lo + 1).min(sorted.len() - 1);
    sorted[lo] + (h - lo as f64) * (sorted[hi] - sorted[lo])
}

/// Why a reported alpha differs from the raw table lookup.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
#[cfg_attr(feature = "serde", serde(rename_all = "snake_case"))]
pub enum AlphaClamp {
    /// Spread ratio below the table's normal-law entry; alpha set to 2.
    Ceiling,
    /// Spread ratio beyond the table's heaviest-tail column.
    TableEdge,
    /// Interpolated value below the configured floor.
    Floor,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct AlphaFit {
    pub alpha: f64,
    pub clamp: Option<AlphaClamp>,
    /// `(q95 - q05) / (q75 - q25)`
    pub spread_ratio: f64,
    /// `(q95 + q05 - 2 q50) / (q95 - q05)`
    pub skew_ratio: f64,
}

// McCulloch (1986), table III: alpha as a function of the spread ratio (rows)
// and the absolute skew ratio (columns).
const SPREAD_GRID: [f64; 15] = [
    2.439, 2.5, 2.6, 2.7, 2.8, 3.0, 3.2, 3.5, 4.0, 5.0, 6.0, 8.0, 10.0, 15.0, 25.0,
];
const SKEW_GRID: [f64; 7] = [0.0, 0.1, 0.2, 0.3, 0.5, 0.7, 1.0];
const ALPHA_TABLE: [[f64; 7]; 15] = [
    [2.000, 2.000, 2.000, 2.000, 2.000, 2.000, 2.000],
    [1.916, 1.924, 1.924, 1.924, 1.924, 1.924, 1.924],
    [1.808, 1.813, 1.829, 1.829, 1.829, 1.829, 1.829],
    [1.729, 1.730, 1.737, 1.745, 1.745, 1.745, 1.745],
    [1.664, 1.663, 1.663, 1.668, 1.676, 1.676, 1.676],
    [1.563, 1.560, 1.553, 1.548, 1.547, 1.547, 1.547],
    [1.484, 1.480, 1.471, 1.460, 1.448, 1.438, 1.438],
    [1.391, 1.386, 1.378, 1.364, 1.337, 1.318, 1.318],
    [1.279, 1.273, 1.266, 1.250, 1.210, 1.184, 1.150],
    [1.128, 1.121, 1.114, 1.101, 1.067, 1.027, 0.973],
    [1.029, 1.021, 1.014, 1.004, 0.974, 0.935, 0.874],
    [0.896, 0.892, 0.884, 0.883, 0.855, 0.823, 0.769],
    [0.818, 0.812, 0.806, 0.801, 0.780, 0.756, 0.691],
    [0.698, 0.695, 0.692, 0.689, 0.676, 0.656, 0.597],
    [0.593, 0.590, 0.588, 0.586, 0.579, 0.563, 0.513],
];

/// Index of the grid cell containing `x` and the interpolation weight, with
/// `x` clamped into the grid.
fn locate(grid: &[f64], x: f64) -> (usize, f64) {
    let last = grid.len() - 1;
    if x <= grid[0] {
        return (0, 0.0);
    }
    if x >= grid[last] {
        return (last - 1, 1.0);
    }
    let i = grid.partition_point(|&g| g <= x) - 1;
    (i, (x - grid[i]) / (grid[i + 1] - grid[i]))
}

fn table_alpha(spread: f64, skew: f64) -> f64 {
    let (i, u) = locate(&SPREAD_GRID, spread);
    let (j, v) = locate(&SKEW_GRID, libm::fabs(skew));
    let t = &ALPHA_TABLE;
    (1.0 - u) * (1.0 - v) * t[i][j]
        + u * (1.0 - v) * t[i + 1][j]
        + (1.0 - u) * v * t[i][j + 1]
        + u * v * t[i + 1][j + 1]
}

/// McCulloch quantile fit of the stable tail parameter, reported in
/// `[DEFAULT_ALPHA_FLOOR, 2]`.
pub fn fit_tail_alpha(bucket: &[f64]) -> Result<AlphaFit> {
    fit_tail_alpha_with_floor(bucket, DEFAULT_ALPHA_FLOOR)
}

pub fn fit_tail_alpha_with_floor(bucket: &[f64], floor: f64) -> Result<AlphaFit> {
    if !(floor > 0.0 && floor < ALPHA_CEILING) {
        return Err(Error::InvalidParameter {
            name: "alpha floor",
            value: floor,
            expected: "(0, 2)",
        });
    }
    if bucket.len() < MIN_BUCKET_LEN {
        return Err(Error::InvalidParameter {
            name: "bucket length",
            value: bucket.len() as f64,
            expected: "at least 8 weekly returns",
        });
    }
    let mut sorted: Vec<f64> = bucket.to_vec();
    sorted.sort_by(f64::total_cmp);
    if sorted[0] == sorted[sorted.len() - 1] {
        return Err(Error::DegenerateBucket);
    }
    let q = |p| quantile_sorted(&sorted, p);
    let (q05, q25, q50, q75, q95) = (q(0.05), q(0.25), q(0.5), q(0.75), q(0.95));
    let iqr = q75 - q25;
    let outer = q95 - q05;
    let skew_ratio = if outer > 0.0 {
        (q95 + q05 - 2.0 * q50) / outer
    } else {
        0.0
    };
    if !(iqr > 0.0) {
        // Mass concentrated inside the quartiles: tails as heavy as the
        // table can express.
        return Ok(AlphaFit {
            alpha: table_alpha(f64::INFINITY, skew_ratio).max(floor),
            clamp: Some(AlphaClamp::TableEdge),
            spread_ratio: f64::INFINITY,
            skew_ratio,
        });
    }
    let spread_ratio = outer / iqr;
    let (mut alpha, mut clamp) = if spread_ratio < SPREAD_GRID[0] {
        (ALPHA_CEILING, Some(AlphaClamp::Ceiling))
    } else if spread_ratio > SPREAD_GRID[SPREAD_GRID.len() - 1] {
        (table_alpha(spread_ratio, skew_ratio), Some(AlphaClamp::TableEdge))
    } else {
        (table_alpha(spread_ratio, skew_ratio), None)
    };
    if alpha > ALPHA_CEILING {
        alpha = ALPHA_CEILING;
        clamp = Some(AlphaClamp::Ceiling);
    }
    if alpha < floor {
        alpha = floor;
        clamp = Some(AlphaClamp::Floor);
    }
    Ok(AlphaFit {
        alpha,
        clamp,
        spread_ratio,
        skew_ratio,
    })
}

/// Sample vector of one yearly bucket.
pub fn sample_vector(bucket: &YearBucket, alpha_floor: f64) -> Result<(SampleVector, AlphaFit)> {
    let (mean_return, std_dev) = mean_and_std(&bucket.returns)?;
    let fit = fit_tail_alpha_with_floor(&bucket.returns, alpha_floor)?;
    Ok((
        SampleVector {
            year: bucket.year,
            mean_return,
            std_dev,
            tail_alpha: fit.alpha,
        },
        fit,
    ))
}

/// One asset's weekly returns, columns aligned with a shared year axis.
#[derive(Debug, Clone, Copy)]
pub struct AssetReturns<'a> {
    pub asset_id: &'a str,
    pub returns: &'a [f64],
}

/// Sample-vector series plus the tail-fit diagnostics of every year.
#[derive(Debug, Clone, PartialEq)]
pub struct FittedSeries {
    pub series: SampleVectorSeries,
    pub fits: Vec<AlphaFit>,
}

/// Builds one sample-vector series per asset. `week_years[t]` is the year of
/// return column `t`, shared by all assets.
pub fn build_sample_series(
    assets: &[AssetReturns<'_>],
    week_years: &[i32],
    alpha_floor: f64,
) -> Result<Vec<FittedSeries>> {
    if assets.is_empty() {
        return Err(Error::Empty("asset list"));
    }
    let mut out = Vec::with_capacity(assets.len());
    for asset in assets {
        let buckets =
            annual_buckets(week_years, asset.returns).map_err(|e| match e {
                Error::TooFewObservations { year, .. } => e.in_asset(asset.asset_id, Some(year)),
                e => e.in_asset(asset.asset_id, None),
            })?;
        let mut vectors = Vec::with_capacity(buckets.len());
        let mut fits = Vec::with_capacity(buckets.len());
        for b in &buckets {
            let (v, fit) =
                sample_vector(b, alpha_floor).map_err(|e| e.in_asset(asset.asset_id, Some(b.year)))?;
            vectors.push(v);
            fits.push(fit);
        }
        let series = SampleVectorSeries::new(asset.asset_id, vectors)?;
        out.push(FittedSeries { series, fits });
    }
    Ok(out)
}
