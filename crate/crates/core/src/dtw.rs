//! Dynamic time warping between yearly sample-vector series.
//!
//! Steps `(1,0)`, `(0,1)` and `(1,1)` with unit weights, endpoints pinned to
//! the first and last year pair, no window and no path-length normalisation.

use alloc::string::String;
use alloc::vec;
use alloc::vec::Vec;
use core::fmt;
use core::str::FromStr;

use crate::error::{Error, Result};
use crate::stats::SampleVectorSeries;

/// Longest series accepted by [`dtw_distance_brute`].
pub const MAX_BRUTE_LEN: usize = 8;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum LocalMetric {
    Manhattan,
    Euclidean,
    SquaredEuclidean,
}

impl LocalMetric {
    pub const ALL: [LocalMetric; 3] = [
        LocalMetric::Manhattan,
        LocalMetric::Euclidean,
        LocalMetric::SquaredEuclidean,
    ];

    pub fn as_str(self) -> &'static str {
        match self {
            LocalMetric::Manhattan => "manhattan",
            LocalMetric::Euclidean => "euclidean",
            LocalMetric::SquaredEuclidean => "sqeuclidean",
        }
    }
}

impl fmt::Display for LocalMetric {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct UnknownMetric(pub String);

impl fmt::Display for UnknownMetric {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(
            f,
            "unknown metric '{}' (expected manhattan, euclidean or sqeuclidean)",
            self.0
        )
    }
}

impl core::error::Error for UnknownMetric {}

impl FromStr for LocalMetric {
    type Err = UnknownMetric;

    fn from_str(s: &str) -> core::result::Result<Self, Self::Err> {
        match s.to_ascii_lowercase().as_str() {
            "manhattan" | "l1" => Ok(LocalMetric::Manhattan),
            "euclidean" | "l2" => Ok(LocalMetric::Euclidean),
            "sqeuclidean" | "squared_euclidean" | "squaredeuclidean" => {
                Ok(LocalMetric::SquaredEuclidean)
            }
            _ => Err(UnknownMetric(s.into())),
        }
    }
}

#[cfg(feature = "serde")]
impl serde::Serialize for LocalMetric {
    fn serialize<S: serde::Serializer>(&self, s: S) -> core::result::Result<S::Ok, S::Error> {
        s.serialize_str(self.as_str())
    }
}

#[cfg(feature = "serde")]
impl<'de> serde::Deserialize<'de> for LocalMetric {
    fn deserialize<D: serde::Deserializer<'de>>(d: D) -> core::result::Result<Self, D::Error> {
        let s: alloc::borrow::Cow<'de, str> = serde::Deserialize::deserialize(d)?;
        s.parse().map_err(serde::de::Error::custom)
    }
}

pub fn local_cost(a: &[f64; 3], b: &[f64; 3], metric: LocalMetric) -> f64 {
    let d = [a[0] - b[0], a[1] - b[1], a[2] - b[2]];
    match metric {
        LocalMetric::Manhattan => libm::fabs(d[0]) + libm::fabs(d[1]) + libm::fabs(d[2]),
        LocalMetric::Euclidean => libm::sqrt(d[0] * d[0] + d[1] * d[1] + d[2] * d[2]),
        LocalMetric::SquaredEuclidean => d[0] * d[0] + d[1] * d[1] + d[2] * d[2],
    }
}

/// Row-major `len(a) x len(b)` matrix of local costs.
#[derive(Debug, Clone, PartialEq)]
pub struct LocalCostMatrix {
    rows: usize,
    cols: usize,
    costs: Vec<f64>,
}

impl LocalCostMatrix {
    pub fn new(a: &[[f64; 3]], b: &[[f64; 3]], metric: LocalMetric) -> Self {
        let mut costs = Vec::with_capacity(a.len() * b.len());
        for x in a {
            costs.extend(b.iter().map(|y| local_cost(x, y, metric)));
        }
        Self {
            rows: a.len(),
            cols: b.len(),
            costs,
        }
    }

    pub fn get(&self, t: usize, u: usize) -> f64 {
        self.costs[t * self.cols + u]
    }

    pub fn shape(&self) -> (usize, usize) {
        (self.rows, self.cols)
    }
}

/// Accumulated-cost table and the optimal warping path.
#[derive(Debug, Clone, PartialEq)]
pub struct Alignment {
    pub distance: f64,
    /// `(t, u)` index pairs from `(0, 0)` to `(T - 1, T - 1)`.
    pub path: Vec<(usize, usize)>,
}

fn check_lengths(a: &[[f64; 3]], b: &[[f64; 3]]) -> Result<usize> {
    if a.len() != b.len() {
        return Err(Error::LengthMismatch {
            left: a.len(),
            right: b.len(),
        });
    }
    if a.is_empty() {
        return Err(Error::Empty("series"));
    }
    Ok(a.len())
}

fn accumulate(costs: &LocalCostMatrix) -> Vec<f64> {
    let (n, m) = costs.shape();
    let mut acc = vec![0.0; n * m];
    for t in 0..n {
        for u in 0..m {
            let c = costs.get(t, u);
            acc[t * m + u] = match (t, u) {
                (0, 0) => c,
                (0, _) => c + acc[u - 1],
                (_, 0) => c + acc[(t - 1) * m],
                _ => {
                    c + acc[(t - 1) * m + u]
                        .min(acc[t * m + u - 1])
                        .min(acc[(t - 1) * m + u - 1])
                }
            };
        }
    }
    acc
}

/// DTW distance between two equally long point sequences.
pub fn dtw_points(a: &[[f64; 3]], b: &[[f64; 3]], metric: LocalMetric) -> Result<f64> {
    let t = check_lengths(a, b)?;
    let acc = accumulate(&LocalCostMatrix::new(a, b, metric));
    Ok(acc[t * t - 1])
}

/// DTW distance together with one optimal warping path.
pub fn dtw_alignment(a: &[[f64; 3]], b: &[[f64; 3]], metric: LocalMetric) -> Result<Alignment> {
    let t = check_lengths(a, b)?;
    let acc = accumulate(&LocalCostMatrix::new(a, b, metric));
    let at = |i: usize, j: usize| acc[i * t + j];
    let mut path = vec![(t - 1, t - 1)];
    let (mut i, mut j) = (t - 1, t - 1);
    while (i, j) != (0, 0) {
        (i, j) = if i == 0 {
            (0, j - 1)
        } else if j == 0 {
            (i - 1, 0)
        } else {
            let diag = at(i - 1, j - 1);
            let up = at(i - 1, j);
            let left = at(i, j - 1);
            if diag <= up && diag <= left {
                (i - 1, j - 1)
            } else if up <= left {
                (i - 1, j)
            } else {
                (i, j - 1)
            }
        };
        path.push((i, j));
    }
    path.reverse();
    Ok(Alignment {
        distance: at(t - 1, t - 1),
        path,
    })
}

fn check_years(a: &SampleVectorSeries, b: &SampleVectorSeries) -> Result<()> {
    if a.len() != b.len() {
        return Err(Error::LengthMismatch {
            left: a.len(),
            right: b.len(),
        });
    }
    if a.first_year() != b.first_year() {
        return Err(Error::YearMismatch {
            left: a.first_year(),
            right: b.first_year(),
        });
    }
    Ok(())
}

pub fn dtw_distance(a: &SampleVectorSeries, b: &SampleVectorSeries, metric: LocalMetric) -> Result<f64> {
    check_years(a, b)?;
    dtw_points(&a.points(), &b.points(), metric)
}

/// Exact DTW by enumerating every admissible warping path. Test oracle for
/// [`dtw_points`]; exponential in the series length.
pub fn dtw_distance_brute(a: &[[f64; 3]], b: &[[f64; 3]], metric: LocalMetric) -> Result<f64> {
    let t = check_lengths(a, b)?;
    if t > MAX_BRUTE_LEN {
        return Err(Error::SeriesTooLong {
            len: t,
            max: MAX_BRUTE_LEN,
        });
    }
    let costs = LocalCostMatrix::new(a, b, metric);
    fn walk(costs: &LocalCostMatrix, i: usize, j: usize, sum: f64, best: &mut f64) {
        let (n, m) = costs.shape();
        let sum = sum + costs.get(i, j);
        if (i, j) == (n - 1, m - 1) {
            if sum < *best {
                *best = sum;
            }
            return;
        }
        if i + 1 < n {
            walk(costs, i + 1, j, sum, best);
        }
        if j + 1 < m {
            walk(costs, i, j + 1, sum, best);
        }
        if i + 1 < n && j + 1 < m {
            walk(costs, i + 1, j + 1, sum, best);
        }
    }
    let mut best = f64::INFINITY;
    walk(&costs, 0, 0, 0.0, &mut best);
    Ok(best)
}

/// Z-scores each of the three variables with mean and standard deviation
/// pooled over all assets and years.
pub fn standardize_panel(series: &[SampleVectorSeries]) -> Result<Vec<SampleVectorSeries>> {
    if series.len() < 2 {
        return Err(Error::InvalidParameter {
            name: "asset count",
            value: series.len() as f64,
            expected: "at least 2",
        });
    }
    let points: Vec<Vec<[f64; 3]>> = series.iter().map(SampleVectorSeries::points).collect();
    let count = points.iter().map(Vec::len).sum::<usize>() as f64;
    let mut mean = [0.0; 3];
    for p in points.iter().flatten() {
        for k in 0..3 {
            mean[k] += p[k];
        }
    }
    mean.iter_mut().for_each(|m| *m /= count);
    let mut var = [0.0; 3];
    for p in points.iter().flatten() {
        for k in 0..3 {
            var[k] += (p[k] - mean[k]) * (p[k] - mean[k]);
        }
    }
    const NAMES: [&str; 3] = ["mean return", "standard deviation", "tail alpha"];
    let mut sd = [0.0; 3];
    for k in 0..3 {
        sd[k] = libm::sqrt(var[k] / count);
        if !(sd[k] > 0.0) {
            return Err(Error::ZeroVariance(NAMES[k]));
        }
    }
    Ok(series
        .iter()
        .zip(&points)
        .map(|(s, pts)| {
            let z: Vec<[f64; 3]> = pts
                .iter()
                .map(|p| {
                    [
                        (p[0] - mean[0]) / sd[0],
                        (p[1] - mean[1]) / sd[1],
                        (p[2] - mean[2]) / sd[2],
                    ]
                })
                .collect();
            s.with_points(&z)
        })
        .collect())
}

/// Symmetric matrix of pairwise DTW distances with asset labels.
#[derive(Debug, Clone, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct DistanceMatrix {
    labels: Vec<String>,
    metric: LocalMetric,
    values: Vec<f64>,
}

impl DistanceMatrix {
    /// Builds a matrix from row-major values, checking symmetry, a zero
    /// diagonal and non-negative entries.
    pub fn from_rows(labels: Vec<String>, metric: LocalMetric, values: Vec<f64>) -> Result<Self> {
        let n = labels.len();
        if values.len() != n * n {
            return Err(Error::LengthMismatch {
                left: values.len(),
                right: n * n,
            });
        }
        for i in 0..n {
            if values[i * n + i] != 0.0 {
                return Err(Error::InvalidParameter {
                    name: "diagonal entry",
                    value: values[i * n + i],
                    expected: "0",
                });
            }
            for j in i + 1..n {
                let v = values[i * n + j];
                if !(v >= 0.0) || !v.is_finite() || v != values[j * n + i] {
                    return Err(Error::InvalidParameter {
                        name: "off-diagonal entry",
                        value: v,
                        expected: "finite, non-negative and symmetric",
                    });
                }
            }
        }
        Ok(Self {
            labels,
            metric,
            values,
        })
    }

    pub fn len(&self) -> usize {
        self.labels.len()
    }

    pub fn is_empty(&self) -> bool {
        self.labels.is_empty()
    }

    pub fn labels(&self) -> &[String] {
        &self.labels
    }

    pub fn metric(&self) -> LocalMetric {
        self.metric
    }

    pub fn get(&self, i: usize, j: usize) -> f64 {
        self.values[i * self.len() + j]
    }

    pub fn row(&self, i: usize) -> &[f64] {
        let n = self.len();
        &self.values[i * n..(i + 1) * n]
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn max(&self) -> f64 {
        self.values.iter().copied().fold(0.0, f64::max)
    }
}

/// DTW distance matrix over all asset pairs. Only the upper triangle is
/// computed; the lower triangle mirrors it.
pub fn pairwise_matrix(series: &[SampleVectorSeries], metric: LocalMetric) -> Result<DistanceMatrix> {
    let n = series.len();
    if n == 0 {
        return Err(Error::Empty("series list"));
    }
    for s in &series[1..] {
        check_years(&series[0], s).map_err(|e| e.in_asset(&s.asset_id, None))?;
    }
    let points: Vec<Vec<[f64; 3]>> = series.iter().map(SampleVectorSeries::points).collect();
    let mut values = vec![0.0; n * n];
    for i in 0..n {
        for j in i + 1..n {
            let d = dtw_points(&points[i], &points[j], metric)?;
            values[i * n + j] = d;
            values[j * n + i] = d;
        }
    }
    Ok(DistanceMatrix {
        labels: series.iter().map(|s| s.asset_id.clone()).collect(),
        metric,
        values,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::stats::SampleVector;

    fn series(id: &str, pts: &[[f64; 3]]) -> SampleVectorSeries {
        let v = pts
            .iter()
            .enumerate()
            .map(|(k, p)| SampleVector {
                year: 2014 + k as i32,
                mean_return: p[0],
                std_dev: p[1],
                tail_alpha: p[2],
            })
            .collect();
        SampleVectorSeries::new(id, v).unwrap()
    }

    #[test]
    fn local_cost_formulas() {
        let a = [1.0, 2.0, 3.0];
        for m in LocalMetric::ALL {
            assert_eq!(local_cost(&a, &a, m), 0.0);
        }
        let b = [0.0, 1.0, 2.0];
        assert_eq!(local_cost(&a, &b, LocalMetric::Manhattan), 3.0);
        assert!((local_cost(&a, &b, LocalMetric::Euclidean) - 3f64.sqrt()).abs() < 1e-15);
        assert_eq!(local_cost(&a, &b, LocalMetric::SquaredEuclidean), 3.0);
        assert_eq!(
            local_cost(&[3.0, 4.0, 0.0], &[0.0; 3], LocalMetric::Euclidean),
            5.0
        );
    }

    #[test]
    fn single_year_is_local_cost() {
        let a = [[0.5, 1.0, 1.7]];
        let b = [[-0.5, 2.0, 1.2]];
        for m in LocalMetric::ALL {
            assert_eq!(dtw_points(&a, &b, m).unwrap(), local_cost(&a[0], &b[0], m));
            assert_eq!(dtw_distance_brute(&a, &b, m).unwrap(), local_cost(&a[0], &b[0], m));
        }
    }

    #[test]
    fn identical_series_is_zero() {
        let a = [[1.0, 2.0, 1.5], [0.2, 3.0, 1.9], [-1.0, 1.0, 2.0]];
        for m in LocalMetric::ALL {
            assert_eq!(dtw_points(&a, &a, m).unwrap(), 0.0);
            assert_eq!(dtw_distance_brute(&a, &a, m).unwrap(), 0.0);
        }
    }

    #[test]
    fn warping_absorbs_a_shift() {
        // b is a delayed by one year; diagonal matching would cost more
        let a = [[0.0; 3], [5.0, 0.0, 0.0], [5.0, 0.0, 0.0], [0.0; 3]];
        let b = [[0.0; 3], [0.0; 3], [5.0, 0.0, 0.0], [0.0; 3]];
        let al = dtw_alignment(&a, &b, LocalMetric::Manhattan).unwrap();
        assert_eq!(al.distance, 0.0);
        assert_eq!(al.path.first(), Some(&(0, 0)));
        assert_eq!(al.path.last(), Some(&(3, 3)));
        let path_cost: f64 = al
            .path
            .iter()
            .map(|&(t, u)| local_cost(&a[t], &b[u], LocalMetric::Manhattan))
            .sum();
        assert_eq!(path_cost, al.distance);
    }

    #[test]
    fn length_mismatch_is_an_error() {
        let a = [[0.0; 3]; 3];
        let b = [[0.0; 3]; 4];
        assert_eq!(
            dtw_points(&a, &b, LocalMetric::Euclidean),
            Err(Error::LengthMismatch { left: 3, right: 4 })
        );
    }

    #[test]
    fn brute_rejects_long_series() {
        let a = [[0.0; 3]; 9];
        assert!(matches!(
            dtw_distance_brute(&a, &a, LocalMetric::Manhattan),
            Err(Error::SeriesTooLong { len: 9, max: 8 })
        ));
    }

    #[test]
    fn metric_names_round_trip() {
        for m in LocalMetric::ALL {
            assert_eq!(m.as_str().parse::<LocalMetric>().unwrap(), m);
        }
        assert!("chebyshev".parse::<LocalMetric>().is_err());
    }

    #[test]
    fn identical_panel_fails_standardisation() {
        let s = series("A", &[[1.0, 2.0, 1.5], [1.0, 2.0, 1.5]]);
        let t = series("B", &[[1.0, 2.0, 1.5], [1.0, 2.0, 1.5]]);
        assert_eq!(
            standardize_panel(&[s, t]),
            Err(Error::ZeroVariance("mean return"))
        );
    }

    #[test]
    fn standardised_panel_has_unit_moments() {
        let a = series("A", &[[1.0, 20.0, 1.5], [-2.0, 30.0, 2.0], [0.5, 12.0, 1.1]]);
        let b = series("B", &[[3.0, 25.0, 1.9], [0.0, 18.0, 1.7], [4.5, 40.0, 2.0]]);
        let z = standardize_panel(&[a, b]).unwrap();
        for k in 0..3 {
            let xs: Vec<f64> = z.iter().flat_map(|s| s.points()).map(|p| p[k]).collect();
            let n = xs.len() as f64;
            let m = xs.iter().sum::<f64>() / n;
            let v = xs.iter().map(|x| (x - m) * (x - m)).sum::<f64>() / n;
            assert!(m.abs() < 1e-12);
            assert!((v - 1.0).abs() < 1e-12);
        }
    }

    #[test]
    fn two_identical_assets_give_zero_matrix() {
        let a = series("A", &[[1.0, 20.0, 1.5], [-2.0, 30.0, 2.0]]);
        let b = series("B", &[[1.0, 20.0, 1.5], [-2.0, 30.0, 2.0]]);
        let d = pairwise_matrix(&[a, b], LocalMetric::SquaredEuclidean).unwrap();
        assert_eq!(d.values(), &[0.0; 4]);
        assert_eq!(d.labels(), &["A", "B"]);
    }

    #[test]
    fn distance_matrix_validation() {
        let labels = vec![String::from("A"), String::from("B")];
        assert!(DistanceMatrix::from_rows(labels.clone(), LocalMetric::Manhattan, vec![0.0, 1.0, 1.0, 0.0]).is_ok());
        assert!(DistanceMatrix::from_rows(labels.clone(), LocalMetric::Manhattan, vec![0.0, 1.0, 2.0, 0.0]).is_err());
        assert!(DistanceMatrix::from_rows(labels.clone(), LocalMetric::Manhattan, vec![1.0, 1.0, 1.0, 0.0]).is_err());
        assert!(DistanceMatrix::from_rows(labels, LocalMetric::Manhattan, vec![0.0, -1.0, -1.0, 0.0]).is_err());
    }

    #[test]
    fn misaligned_years_are_rejected() {
        let a = series("A", &[[1.0, 20.0, 1.5], [-2.0, 30.0, 2.0]]);
        let mut v = a.vectors().to_vec();
        for x in &mut v {
            x.year += 1;
        }
        let b = SampleVectorSeries::new("B", v).unwrap();
        assert!(dtw_distance(&a, &b, LocalMetric::Manhattan).is_err());
        assert!(pairwise_matrix(&[a, b], LocalMetric::Manhattan).is_err());
    }
}
