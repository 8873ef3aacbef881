//! The segmentation chain from sample-vector series to core/satellite sets.

use alloc::vec::Vec;

use crate::dtw::{pairwise_matrix, standardize_panel, DistanceMatrix, LocalMetric};
use crate::error::{Error, Result};
use crate::rbf::{fit, frame_centers, shape_from_residual, RbfModel, SurfaceSample};
use crate::segmentation::{
    core_block, detect_kink, ecdf_upper_triangle, intersect, threshold, EcdfCurve, Kink, MetricCore,
    SegmentationResult, UPPER_KINK_WINDOW,
};
use crate::seriation::{seriate, SeriatedMatrix};
use crate::stats::SampleVectorSeries;

#[derive(Debug, Clone, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
#[cfg_attr(feature = "serde", serde(default, deny_unknown_fields))]
pub struct SegmentationSettings {
    pub metrics: Vec<LocalMetric>,
    /// Z-score the three variables over the pooled panel before DTW.
    pub standardize: bool,
    /// Centre frame spacing; `None` uses a sixth of the matrix size.
    pub frame_spacing: Option<f64>,
    /// Height a basis function keeps at the neighbouring centre.
    pub residual: f64,
    pub reg_alpha: f64,
    pub constant_term: bool,
    pub kink_window: (f64, f64),
    /// Explicit ECDF level per metric, bypassing kink detection.
    pub fixed_p: Vec<(LocalMetric, f64)>,
}

impl Default for SegmentationSettings {
    fn default() -> Self {
        Self {
            metrics: LocalMetric::ALL.to_vec(),
            standardize: true,
            frame_spacing: None,
            residual: 0.5,
            reg_alpha: 0.0,
            constant_term: true,
            kink_window: UPPER_KINK_WINDOW,
            fixed_p: Vec::new(),
        }
    }
}

impl SegmentationSettings {
    pub fn validate(&self) -> Result<()> {
        if self.metrics.is_empty() {
            return Err(Error::Empty("metric list"));
        }
        if let Some(r) = self.frame_spacing {
            if !(r > 0.0) {
                return Err(Error::InvalidParameter {
                    name: "frame_spacing",
                    value: r,
                    expected: "> 0",
                });
            }
        }
        if !(self.residual > 0.0 && self.residual < 1.0) {
            return Err(Error::InvalidParameter {
                name: "residual",
                value: self.residual,
                expected: "(0, 1)",
            });
        }
        if !(0.0..100.0).contains(&self.reg_alpha) {
            return Err(Error::InvalidParameter {
                name: "reg_alpha",
                value: self.reg_alpha,
                expected: "[0, 100)",
            });
        }
        let (lo, hi) = self.kink_window;
        if !(0.0 < lo && lo < hi && hi < 1.0) {
            return Err(Error::InvalidParameter {
                name: "kink_window",
                value: lo,
                expected: "0 < low < high < 1",
            });
        }
        for &(_, p) in &self.fixed_p {
            if !(p > 0.0 && p < 1.0) {
                return Err(Error::InvalidParameter {
                    name: "p",
                    value: p,
                    expected: "(0, 1)",
                });
            }
        }
        Ok(())
    }

    pub fn fixed_p_for(&self, metric: LocalMetric) -> Option<f64> {
        self.fixed_p.iter().find(|(m, _)| *m == metric).map(|&(_, p)| p)
    }

    pub fn spacing_for(&self, n: usize) -> f64 {
        self.frame_spacing.unwrap_or(n as f64 / 6.0)
    }
}

/// Every intermediate of one metric's branch.
#[derive(Debug, Clone, PartialEq)]
pub struct MetricOutcome {
    pub distances: DistanceMatrix,
    pub seriated: SeriatedMatrix,
    pub model: RbfModel,
    pub ecdf: EcdfCurve,
    /// `None` when `p` was fixed by the caller.
    pub kink: Option<Kink>,
    pub core: MetricCore,
}

/// Seriation, surface fit, threshold and core block for one distance matrix.
pub fn segment_metric(distances: DistanceMatrix, settings: &SegmentationSettings) -> Result<MetricOutcome> {
    settings.validate()?;
    let seriated = seriate(&distances)?;
    let n = seriated.len();
    let spacing = settings.spacing_for(n);
    let centers = frame_centers(n, spacing)?;
    let shape = shape_from_residual(spacing, settings.residual)?;
    let sample = SurfaceSample::full_matrix(&seriated);
    let model = fit(&sample, &centers, shape, settings.reg_alpha, settings.constant_term)?;
    let ecdf = ecdf_upper_triangle(&seriated)?;
    let (p, kink) = match settings.fixed_p_for(distances.metric()) {
        Some(p) => (p, None),
        None => {
            let k = detect_kink(&ecdf, settings.kink_window)?;
            (k.p, Some(k))
        }
    };
    let d_bound = threshold(&ecdf, p)?;
    let core = core_block(&model, &seriated, d_bound, p)?;
    Ok(MetricOutcome {
        distances,
        seriated,
        model,
        ecdf,
        kink,
        core,
    })
}

#[derive(Debug, Clone, PartialEq)]
pub struct UniverseOutcome {
    /// DTW inputs after optional standardisation.
    pub inputs: Vec<SampleVectorSeries>,
    pub per_metric: Vec<MetricOutcome>,
    pub result: SegmentationResult,
}

/// DTW distance matrices for every configured metric.
pub fn distance_matrices(
    series: &[SampleVectorSeries],
    settings: &SegmentationSettings,
) -> Result<(Vec<SampleVectorSeries>, Vec<DistanceMatrix>)> {
    settings.validate()?;
    let inputs = if settings.standardize {
        standardize_panel(series)?
    } else {
        series.to_vec()
    };
    let matrices = settings
        .metrics
        .iter()
        .map(|&m| pairwise_matrix(&inputs, m))
        .collect::<Result<Vec<_>>>()?;
    Ok((inputs, matrices))
}

/// Full chain over a universe; the universe order is the input order.
pub fn segment_universe(
    series: &[SampleVectorSeries],
    settings: &SegmentationSettings,
) -> Result<UniverseOutcome> {
    let (inputs, matrices) = distance_matrices(series, settings)?;
    let per_metric = matrices
        .into_iter()
        .map(|d| segment_metric(d, settings))
        .collect::<Result<Vec<_>>>()?;
    let universe: Vec<_> = series.iter().map(|s| s.asset_id.clone()).collect();
    let result = intersect(&universe, per_metric.iter().map(|o| o.core.clone()).collect())?;
    Ok(UniverseOutcome {
        inputs,
        per_metric,
        result,
    })
}
