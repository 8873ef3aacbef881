//! Threshold selection on the ECDF of normalised distances and delimitation
//! of the core block.

use alloc::string::String;
use alloc::vec::Vec;

use crate::dtw::LocalMetric;
use crate::error::{Error, Result};
use crate::rbf::RbfModel;
use crate::seriation::SeriatedMatrix;

/// Kink search window for the upper kink of the ECDF.
pub const UPPER_KINK_WINDOW: (f64, f64) = (0.60, 0.90);
/// Kink search window used to isolate the tight inner core.
pub const LOWER_KINK_WINDOW: (f64, f64) = (0.05, 0.40);

/// Below this chord distance the ECDF is treated as having no kink.
const KINK_TOLERANCE: f64 = 1e-9;

/// Empirical distribution of the strict upper triangle.
#[derive(Debug, Clone, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct EcdfCurve {
    sorted_values: Vec<f64>,
}

impl EcdfCurve {
    pub fn from_values(mut values: Vec<f64>) -> Result<Self> {
        if values.is_empty() {
            return Err(Error::Empty("ECDF values"));
        }
        values.sort_by(f64::total_cmp);
        Ok(Self {
            sorted_values: values,
        })
    }

    pub fn len(&self) -> usize {
        self.sorted_values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.sorted_values.is_empty()
    }

    pub fn values(&self) -> &[f64] {
        &self.sorted_values
    }

    /// `k / K` for the `k`-th smallest value, `k = 1..=K`.
    pub fn probability(&self, index: usize) -> f64 {
        (index + 1) as f64 / self.len() as f64
    }

    pub fn probabilities(&self) -> Vec<f64> {
        (0..self.len()).map(|k| self.probability(k)).collect()
    }

    /// Fraction of values `<= x`.
    pub fn evaluate(&self, x: f64) -> f64 {
        self.sorted_values.partition_point(|&v| v <= x) as f64 / self.len() as f64
    }
}

pub fn ecdf_upper_triangle(s: &SeriatedMatrix) -> Result<EcdfCurve> {
    let n = s.len();
    if n < 2 {
        return Err(Error::InvalidParameter {
            name: "matrix size",
            value: n as f64,
            expected: "at least 2",
        });
    }
    let mut values = Vec::with_capacity(n * (n - 1) / 2);
    for i in 0..n {
        for j in i + 1..n {
            values.push(s.get(i, j));
        }
    }
    EcdfCurve::from_values(values)
}

#[derive(Debug, Clone, Copy, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct Kink {
    /// ECDF level at the kink.
    pub p: f64,
    /// Sorted value at the kink (the implied quantile).
    pub value: f64,
    /// Perpendicular distance from the window chord.
    pub chord_distance: f64,
}

fn check_window(window: (f64, f64)) -> Result<()> {
    if !(0.0 < window.0 && window.0 < window.1 && window.1 <= 1.0) {
        return Err(Error::InvalidParameter {
            name: "kink window",
            value: window.0,
            expected: "0 < low < high <= 1",
        });
    }
    Ok(())
}

/// Knee of the ECDF inside `window`: the point of the curve
/// `value -> probability` lying farthest above the chord between the window
/// endpoints, where the steep part of the curve turns flat.
pub fn detect_kink(curve: &EcdfCurve, window: (f64, f64)) -> Result<Kink> {
    check_window(window)?;
    let k = curve.len() as f64;
    let eps = 1e-12;
    let first = (libm::ceil(window.0 * k - eps) as usize).max(1) - 1;
    let last = ((libm::floor(window.1 * k + eps) as usize).min(curve.len())).max(1) - 1;
    if last <= first + 1 {
        return Err(Error::NoKink { window });
    }
    let v = curve.values();
    let (x0, y0) = (v[first], curve.probability(first));
    let (dx, dy) = (v[last] - x0, curve.probability(last) - y0);
    let chord = libm::sqrt(dx * dx + dy * dy);
    if !(dx > 0.0) {
        return Err(Error::NoKink { window });
    }
    let mut best: Option<Kink> = None;
    for (i, &x) in v.iter().enumerate().take(last).skip(first + 1) {
        let d = (dx * (curve.probability(i) - y0) - dy * (x - x0)) / chord;
        if best.is_none_or(|b| d > b.chord_distance) {
            best = Some(Kink {
                p: curve.probability(i),
                value: x,
                chord_distance: d,
            });
        }
    }
    match best {
        Some(b) if b.chord_distance > KINK_TOLERANCE => Ok(b),
        _ => Err(Error::NoKink { window }),
    }
}

/// Lower quantile: the smallest sorted value whose ECDF level is `>= p`.
pub fn threshold(curve: &EcdfCurve, p: f64) -> Result<f64> {
    if !(p > 0.0 && p <= 1.0) {
        return Err(Error::InvalidParameter {
            name: "p",
            value: p,
            expected: "(0, 1]",
        });
    }
    let k = curve.len() as f64;
    let rank = (libm::ceil(p * k - 1e-9) as usize).clamp(1, curve.len());
    Ok(curve.values()[rank - 1])
}

/// Core found under one metric.
#[derive(Debug, Clone, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct MetricCore {
    pub metric: LocalMetric,
    pub p_used: f64,
    pub d_bound: f64,
    /// Core members in seriation order.
    pub core_ids: Vec<String>,
}

impl MetricCore {
    pub fn is_empty(&self) -> bool {
        self.core_ids.is_empty()
    }

    pub fn contains(&self, id: &str) -> bool {
        self.core_ids.iter().any(|c| c == id)
    }
}

/// Size of the largest leading block whose modelled height stays at or below
/// `d_bound` on every cell of its upper triangle (diagonal included).
pub fn core_block_size(model: &RbfModel, n: usize, d_bound: f64) -> usize {
    let mut k = 0;
    while k < n {
        let col = (k + 1) as f64;
        if (1..=k + 1).any(|i| model.evaluate(i as f64, col) > d_bound) {
            break;
        }
        k += 1;
    }
    k
}

/// Leading seriated assets enclosed by the `d_bound` contour of the model.
pub fn core_block(model: &RbfModel, s: &SeriatedMatrix, d_bound: f64, p_used: f64) -> Result<MetricCore> {
    if !(0.0..=1.0).contains(&d_bound) {
        return Err(Error::InvalidParameter {
            name: "d_bound",
            value: d_bound,
            expected: "[0, 1]",
        });
    }
    let k = core_block_size(model, s.len(), d_bound);
    Ok(MetricCore {
        metric: s.metric,
        p_used,
        d_bound,
        core_ids: s.labels[..k].to_vec(),
    })
}

/// Per-metric cores and their intersection over a fixed universe.
#[derive(Debug, Clone, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct SegmentationResult {
    /// Asset ids in reporting order.
    pub universe: Vec<String>,
    pub per_metric: Vec<MetricCore>,
    /// Members of every metric core, in universe order.
    pub intersection_core: Vec<String>,
    /// Universe minus the intersection core, in universe order.
    pub satellite: Vec<String>,
}

impl SegmentationResult {
    pub fn is_core(&self, id: &str) -> bool {
        self.intersection_core.iter().any(|c| c == id)
    }
}

pub fn intersect(universe: &[String], cores: Vec<MetricCore>) -> Result<SegmentationResult> {
    if cores.is_empty() {
        return Err(Error::Empty("metric cores"));
    }
    for c in &cores {
        if !c.core_ids.iter().all(|id| universe.contains(id)) {
            return Err(Error::UniverseMismatch);
        }
    }
    let (intersection_core, satellite) = universe
        .iter()
        .cloned()
        .partition(|id| cores.iter().all(|c| c.contains(id)));
    Ok(SegmentationResult {
        universe: universe.to_vec(),
        per_metric: cores,
        intersection_core,
        satellite,
    })
}
