//! Daily price files to a dense weekly log-return panel.
//!
//! Prices are converted into the target currency on the daily grid, sampled
//! once per week on an anchor weekday, gaps of at most `max_gap` weeks are
//! filled by carrying the last observation forward, and assets with longer
//! gaps (or no observation in the first week) are excluded.

use std::io::Read;
use std::path::Path;

use chrono::{Datelike, Days, NaiveDate, Weekday};
use serde::{Deserialize, Serialize};

use crate::error::{PipelineError, Result};

pub const DATE_FORMAT: &str = "%Y-%m-%d";

/// Column names of a price file.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct CsvSchema {
    pub date_column: String,
    pub close_column: String,
}

impl Default for CsvSchema {
    fn default() -> Self {
        Self {
            date_column: "date".into(),
            close_column: "close".into(),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct RawPriceSeries {
    pub asset_id: String,
    /// Ascending dates, positive prices.
    pub observations: Vec<(NaiveDate, f64)>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct FxSeries {
    /// Ascending dates, positive source-to-target rates.
    pub observations: Vec<(NaiveDate, f64)>,
}

impl FxSeries {
    /// Rate on `date` or the most recent earlier date.
    pub fn rate_at(&self, date: NaiveDate) -> Option<f64> {
        let k = self.observations.partition_point(|(d, _)| *d <= date);
        k.checked_sub(1).map(|k| self.observations[k].1)
    }
}

fn column(headers: &csv::StringRecord, name: &str, path: &Path) -> Result<usize> {
    headers
        .iter()
        .position(|h| h.trim() == name)
        .ok_or_else(|| PipelineError::Parse {
            path: path.to_path_buf(),
            line: 1,
            message: format!("missing column `{name}`"),
        })
}

/// Reads `(date, value)` pairs, sorts them and rejects duplicate dates and
/// non-positive values.
fn read_dated_values<R: Read>(
    reader: R,
    path: &Path,
    date_column: &str,
    value_column: &str,
) -> Result<Vec<(NaiveDate, f64)>> {
    let mut rdr = csv::ReaderBuilder::new().trim(csv::Trim::All).from_reader(reader);
    let parse_err = |line: u64, message: String| PipelineError::Parse {
        path: path.to_path_buf(),
        line,
        message,
    };
    let headers = rdr.headers().map_err(|e| parse_err(1, e.to_string()))?.clone();
    let (di, vi) = (column(&headers, date_column, path)?, column(&headers, value_column, path)?);
    let mut rows: Vec<(NaiveDate, f64, u64)> = Vec::new();
    for record in rdr.records() {
        let record = record.map_err(|e| {
            let line = e.position().map_or(0, |p| p.line());
            parse_err(line, e.to_string())
        })?;
        let line = record.position().map_or(0, |p| p.line());
        let field = |i: usize| record.get(i).ok_or_else(|| parse_err(line, "short row".into()));
        let raw_date = field(di)?;
        let date = NaiveDate::parse_from_str(raw_date, DATE_FORMAT)
            .map_err(|e| parse_err(line, format!("bad date `{raw_date}`: {e}")))?;
        let raw_value = field(vi)?;
        let value: f64 = raw_value
            .parse()
            .map_err(|_| parse_err(line, format!("bad number `{raw_value}`")))?;
        if !(value > 0.0) || !value.is_finite() {
            return Err(PipelineError::NonPositivePrice {
                path: path.to_path_buf(),
                line,
                value,
            });
        }
        rows.push((date, value, line));
    }
    rows.sort_by_key(|r| r.0);
    if let Some(w) = rows.windows(2).find(|w| w[0].0 == w[1].0) {
        return Err(PipelineError::DuplicateDate {
            path: path.to_path_buf(),
            line: w[0].2.max(w[1].2),
            date: w[1].0,
        });
    }
    Ok(rows.into_iter().map(|(d, v, _)| (d, v)).collect())
}

fn open(path: &Path) -> Result<std::fs::File> {
    std::fs::File::open(path).map_err(|e| PipelineError::io(path, e))
}

/// Asset id of a price file: its file stem.
pub fn asset_id_of(path: &Path) -> Result<String> {
    path.file_stem()
        .and_then(|s| s.to_str())
        .map(str::to_owned)
        .ok_or_else(|| PipelineError::Invalid(format!("no asset id in {}", path.display())))
}

pub fn parse_price_csv(path: &Path, schema: &CsvSchema) -> Result<RawPriceSeries> {
    read_price_csv(open(path)?, path, asset_id_of(path)?, schema)
}

/// As [`parse_price_csv`] for any reader; `origin` is used in messages.
pub fn read_price_csv<R: Read>(
    reader: R,
    origin: &Path,
    asset_id: String,
    schema: &CsvSchema,
) -> Result<RawPriceSeries> {
    let observations = read_dated_values(reader, origin, &schema.date_column, &schema.close_column)?;
    Ok(RawPriceSeries {
        asset_id,
        observations,
    })
}

/// FX file with columns `date` and `rate`.
pub fn parse_fx_csv(path: &Path) -> Result<FxSeries> {
    read_fx_csv(open(path)?, path)
}

pub fn read_fx_csv<R: Read>(reader: R, origin: &Path) -> Result<FxSeries> {
    Ok(FxSeries {
        observations: read_dated_values(reader, origin, "date", "rate")?,
    })
}

/// Multiplies every price by the rate of its date, carrying the last rate
/// forward over days without one.
pub fn convert_currency(series: &RawPriceSeries, fx: &FxSeries) -> Result<RawPriceSeries> {
    let observations = series
        .observations
        .iter()
        .map(|&(d, p)| {
            fx.rate_at(d).map(|r| (d, p * r)).ok_or_else(|| PipelineError::NoFxRate {
                asset: series.asset_id.clone(),
                date: d,
            })
        })
        .collect::<Result<_>>()?;
    Ok(RawPriceSeries {
        asset_id: series.asset_id.clone(),
        observations,
    })
}

/// Week-end dates on one weekday, seven days apart.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct WeekGrid {
    pub anchor: Weekday,
    pub dates: Vec<NaiveDate>,
}

impl WeekGrid {
    /// Every `anchor` day from the first one on or after `start` to the last
    /// one on or before `end`.
    pub fn new(start: NaiveDate, end: NaiveDate, anchor: Weekday) -> Result<Self> {
        if end < start {
            return Err(PipelineError::Invalid(format!("empty date window {start}..{end}")));
        }
        let ahead = (7 + anchor.num_days_from_monday() - start.weekday().num_days_from_monday()) % 7;
        let mut d = start + Days::new(ahead.into());
        let mut dates = Vec::new();
        while d <= end {
            dates.push(d);
            d = d + Days::new(7);
        }
        Ok(Self { anchor, dates })
    }

    /// Grid over the span of a daily series.
    pub fn spanning(series: &RawPriceSeries, anchor: Weekday) -> Result<Self> {
        match (series.observations.first(), series.observations.last()) {
            (Some(&(a, _)), Some(&(b, _))) => Self::new(a, b, anchor),
            _ => Err(PipelineError::EmptySeries(series.asset_id.clone())),
        }
    }

    pub fn len(&self) -> usize {
        self.dates.len()
    }

    pub fn is_empty(&self) -> bool {
        self.dates.is_empty()
    }
}

/// One value per grid week; `None` marks a week without any observation.
#[derive(Debug, Clone, PartialEq)]
pub struct WeeklySeries {
    pub asset_id: String,
    pub values: Vec<Option<f64>>,
}

/// The last observation of each week `(d - 6) ..= d` of the grid.
pub fn resample_weekly(series: &RawPriceSeries, grid: &WeekGrid) -> Result<WeeklySeries> {
    if series.observations.is_empty() {
        return Err(PipelineError::EmptySeries(series.asset_id.clone()));
    }
    let obs = &series.observations;
    let values = grid
        .dates
        .iter()
        .map(|&d| {
            let k = obs.partition_point(|(od, _)| *od <= d);
            let week_start = d - Days::new(6);
            k.checked_sub(1)
                .map(|k| obs[k])
                .filter(|(od, _)| *od >= week_start)
                .map(|(_, p)| p)
        })
        .collect();
    Ok(WeeklySeries {
        asset_id: series.asset_id.clone(),
        values,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ExclusionReason {
    /// A run of missing weeks longer than the allowed gap.
    Gap,
    /// No observation in the first grid week, so nothing to carry forward.
    MissingAtStart,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Exclusion {
    pub asset_id: String,
    pub reason: ExclusionReason,
    /// Longest run of missing weeks (the leading run for `missing_at_start`).
    pub gap_length: usize,
}

/// Dense asset-by-week price matrix.
#[derive(Debug, Clone, PartialEq)]
pub struct PricePanel {
    pub assets: Vec<String>,
    pub weeks: Vec<NaiveDate>,
    /// `prices[a][t]`
    pub prices: Vec<Vec<f64>>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct GapFill {
    pub panel: PricePanel,
    pub exclusions: Vec<Exclusion>,
}

fn longest_missing_run(values: &[Option<f64>]) -> usize {
    let (mut best, mut run) = (0, 0);
    for v in values {
        run = if v.is_none() { run + 1 } else { 0 };
        best = best.max(run);
    }
    best
}

/// Carries the last observation forward over runs of at most `max_gap`
/// missing weeks and excludes every asset with a longer run.
pub fn fill_gaps_locf(rows: &[WeeklySeries], grid: &WeekGrid, max_gap: usize) -> Result<GapFill> {
    let mut panel = PricePanel {
        assets: Vec::new(),
        weeks: grid.dates.clone(),
        prices: Vec::new(),
    };
    let mut exclusions = Vec::new();
    for row in rows {
        if row.values.len() != grid.len() {
            return Err(PipelineError::Invalid(format!(
                "{}: {} weekly values for a grid of {}",
                row.asset_id,
                row.values.len(),
                grid.len()
            )));
        }
        if row.values.first().is_none_or(Option::is_none) {
            exclusions.push(Exclusion {
                asset_id: row.asset_id.clone(),
                reason: ExclusionReason::MissingAtStart,
                gap_length: row.values.iter().take_while(|v| v.is_none()).count(),
            });
            continue;
        }
        let run = longest_missing_run(&row.values);
        if run > max_gap {
            exclusions.push(Exclusion {
                asset_id: row.asset_id.clone(),
                reason: ExclusionReason::Gap,
                gap_length: run,
            });
            continue;
        }
        let mut last = 0.0;
        let filled = row
            .values
            .iter()
            .map(|v| {
                if let Some(p) = v {
                    last = *p;
                }
                last
            })
            .collect();
        panel.assets.push(row.asset_id.clone());
        panel.prices.push(filled);
    }
    Ok(GapFill { panel, exclusions })
}

/// Weekly natural-log returns; column `t` belongs to week `weeks[t]`.
#[derive(Debug, Clone, PartialEq)]
pub struct ReturnPanel {
    pub assets: Vec<String>,
    pub weeks: Vec<NaiveDate>,
    pub returns: Vec<Vec<f64>>,
}

impl ReturnPanel {
    /// Calendar year of every return column.
    pub fn week_years(&self) -> Vec<i32> {
        self.weeks.iter().map(|d| d.year()).collect()
    }
}

pub fn log_returns(panel: &PricePanel) -> Result<ReturnPanel> {
    if panel.weeks.len() < 2 {
        return Err(PipelineError::Invalid(format!(
            "need at least 2 weeks of prices, got {}",
            panel.weeks.len()
        )));
    }
    if panel.assets.is_empty() {
        return Err(PipelineError::Invalid("no assets left after gap filling".into()));
    }
    Ok(ReturnPanel {
        assets: panel.assets.clone(),
        weeks: panel.weeks[1..].to_vec(),
        returns: panel
            .prices
            .iter()
            .map(|p| p.windows(2).map(|w| (w[1] / w[0]).ln()).collect())
            .collect(),
    })
}

pub fn parse_weekday(s: &str) -> Result<Weekday> {
    s.parse::<Weekday>()
        .map_err(|_| PipelineError::Config(format!("unknown weekday `{s}`")))
}
