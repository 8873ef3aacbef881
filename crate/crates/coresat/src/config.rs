//! Pipeline configuration, read from TOML (or from the `config` entry of a
//! run manifest).

use std::collections::BTreeMap;
use std::path::{Path, PathBuf};

use chrono::{NaiveDate, Weekday};
use coresat_core::stats::DEFAULT_ALPHA_FLOOR;
use coresat_core::{LocalMetric, SegmentationSettings};
use serde::{Deserialize, Serialize};

use crate::error::{PipelineError, Result};
use crate::ingest::{parse_weekday, CsvSchema};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct DateWindow {
    pub start: NaiveDate,
    pub end: NaiveDate,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SegmentationConfig {
    pub metrics: Vec<LocalMetric>,
    pub standardize: bool,
    /// Frame spacing of the RBF centres; unset means a sixth of the universe.
    pub frame_spacing: Option<f64>,
    pub residual: f64,
    pub reg_alpha: f64,
    pub constant_term: bool,
    pub kink_window: [f64; 2],
    /// Fixed ECDF level per metric name, skipping kink detection.
    pub p: BTreeMap<String, f64>,
}

impl Default for SegmentationConfig {
    fn default() -> Self {
        let s = SegmentationSettings::default();
        Self {
            metrics: s.metrics,
            standardize: s.standardize,
            frame_spacing: s.frame_spacing,
            residual: s.residual,
            reg_alpha: s.reg_alpha,
            constant_term: s.constant_term,
            kink_window: [s.kink_window.0, s.kink_window.1],
            p: BTreeMap::new(),
        }
    }
}

impl SegmentationConfig {
    pub fn to_settings(&self) -> Result<SegmentationSettings> {
        let fixed_p = self
            .p
            .iter()
            .map(|(name, &p)| {
                name.parse::<LocalMetric>()
                    .map(|m| (m, p))
                    .map_err(|e| PipelineError::Config(e.to_string()))
            })
            .collect::<Result<Vec<_>>>()?;
        let settings = SegmentationSettings {
            metrics: self.metrics.clone(),
            standardize: self.standardize,
            frame_spacing: self.frame_spacing,
            residual: self.residual,
            reg_alpha: self.reg_alpha,
            constant_term: self.constant_term,
            kink_window: (self.kink_window[0], self.kink_window[1]),
            fixed_p,
        };
        settings
            .validate()
            .map_err(|e| PipelineError::Config(e.to_string()))?;
        Ok(settings)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct PipelineConfig {
    /// Directory of per-asset price files, `<asset_id>.csv`.
    pub data_dir: PathBuf,
    /// Daily source-to-target exchange rates; prices are used as they are
    /// when unset.
    pub fx_file: Option<PathBuf>,
    /// `asset_id,name` rows; also fixes the reporting order.
    pub names_file: Option<PathBuf>,
    pub output_dir: PathBuf,
    pub window: DateWindow,
    pub weekly_anchor: String,
    pub max_gap: usize,
    pub alpha_floor: f64,
    pub schema: CsvSchema,
    pub segmentation: SegmentationConfig,
}

impl Default for PipelineConfig {
    fn default() -> Self {
        Self {
            data_dir: PathBuf::from("data"),
            fx_file: None,
            names_file: None,
            output_dir: PathBuf::from("out"),
            window: DateWindow {
                start: NaiveDate::from_ymd_opt(2014, 1, 1).expect("valid date"),
                end: NaiveDate::from_ymd_opt(2019, 6, 1).expect("valid date"),
            },
            weekly_anchor: "sunday".into(),
            max_gap: 4,
            alpha_floor: DEFAULT_ALPHA_FLOOR,
            schema: CsvSchema::default(),
            segmentation: SegmentationConfig::default(),
        }
    }
}

#[derive(Deserialize)]
struct ManifestConfig {
    config: PipelineConfig,
}

impl PipelineConfig {
    pub fn from_toml(text: &str) -> Result<Self> {
        toml::from_str(text).map_err(|e| PipelineError::Config(e.to_string()))
    }

    /// Reads a TOML config, or the config snapshot of a JSON run manifest.
    /// Relative paths are taken relative to the file's directory.
    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(|e| PipelineError::io(path, e))?;
        let mut config = if path.extension().is_some_and(|e| e == "json") {
            serde_json::from_str::<ManifestConfig>(&text)
                .map(|m| m.config)
                .or_else(|_| serde_json::from_str::<PipelineConfig>(&text))
                .map_err(|e| PipelineError::Config(format!("{}: {e}", path.display())))?
        } else {
            Self::from_toml(&text)
                .map_err(|e| PipelineError::Config(format!("{}: {e}", path.display())))?
        };
        if let Some(base) = path.parent() {
            config.resolve_relative(base);
        }
        Ok(config)
    }

    pub fn resolve_relative(&mut self, base: &Path) {
        let fix = |p: &mut PathBuf| {
            if p.is_relative() {
                *p = base.join(&*p);
            }
        };
        fix(&mut self.data_dir);
        fix(&mut self.output_dir);
        if let Some(p) = self.fx_file.as_mut() {
            fix(p);
        }
        if let Some(p) = self.names_file.as_mut() {
            fix(p);
        }
    }

    pub fn anchor(&self) -> Result<Weekday> {
        parse_weekday(&self.weekly_anchor)
    }

    pub fn validate(&self) -> Result<()> {
        if self.window.end <= self.window.start {
            return Err(PipelineError::Config(format!(
                "empty date window {} .. {}",
                self.window.start, self.window.end
            )));
        }
        self.anchor()?;
        if !(self.alpha_floor > 0.0 && self.alpha_floor < 2.0) {
            return Err(PipelineError::Config(format!(
                "alpha_floor {} outside (0, 2)",
                self.alpha_floor
            )));
        }
        self.segmentation.to_settings()?;
        Ok(())
    }

    pub fn to_toml(&self) -> String {
        toml::to_string(self).expect("config serialises to TOML")
    }
}

/// Commented default configuration printed by `coresat config --example`.
pub const EXAMPLE: &str = r#"# coresat pipeline configuration. Every key is optional; the values shown
# are the defaults. Relative paths are resolved against this file's folder.

# One CSV per asset, named <asset_id>.csv, with a header row.
data_dir = "data"
# Daily exchange rates (columns date, rate) multiplied into every price.
# Days without a rate use the last earlier one. Leave unset to keep the
# prices in their own currency.
# fx_file = "fx.csv"
# Optional asset_id,name table; its row order is the reporting order.
# Without it assets are reported by id in file-name order.
# names_file = "names.csv"
output_dir = "out"

# Weekly observations are taken on this weekday: the last daily price of
# the seven days ending on it.
weekly_anchor = "sunday"
# Up to this many consecutive missing weeks are filled with the previous
# price; longer gaps exclude the asset.
max_gap = 4
# Lowest tail alpha reported by the quantile fit (clamped fits are flagged).
alpha_floor = 0.5

[window]
start = "2014-01-01"
end = "2019-06-01"

[schema]
date_column = "date"
close_column = "close"

[segmentation]
# any of "manhattan", "euclidean", "sqeuclidean"
metrics = ["manhattan", "euclidean", "sqeuclidean"]
# z-score mean return, std and alpha over the pooled panel before DTW
standardize = true
# RBF centre spacing on the frame; unset means universe size / 6
# frame_spacing = 4.5
# height a basis function keeps at the neighbouring centre
residual = 0.5
# Tikhonov weight, 0 <= reg_alpha < 100
reg_alpha = 0.0
constant_term = true
# ECDF band searched for the kink; [0.05, 0.40] finds the tight inner core
kink_window = [0.6, 0.9]

# Fixed ECDF level per metric instead of kink detection:
[segmentation.p]
# sqeuclidean = 0.75
"#;
