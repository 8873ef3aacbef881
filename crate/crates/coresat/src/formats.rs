//! CSV and JSON encodings of the pipeline intermediates.
//!
//! Numbers are written with Rust's shortest round-trip formatting, so
//! reading an artifact back reproduces the exact values that were written.

use std::collections::BTreeMap;
use std::path::Path;

use chrono::NaiveDate;
use coresat_core::rbf::RbfModel;
use coresat_core::segmentation::{EcdfCurve, Kink};
use coresat_core::stats::{AlphaClamp, AlphaFit, FittedSeries, SampleVector};
use coresat_core::{DistanceMatrix, LocalMetric, SampleVectorSeries, SeriatedMatrix};
use serde::{Deserialize, Serialize};

use crate::error::{PipelineError, Result};
use crate::ingest::{Exclusion, PricePanel, ReturnPanel, DATE_FORMAT};

fn csv_bytes(rows: impl IntoIterator<Item = Vec<String>>) -> Vec<u8> {
    let mut w = csv::WriterBuilder::new().terminator(csv::Terminator::Any(b'\n')).from_writer(Vec::new());
    for row in rows {
        w.write_record(&row).expect("in-memory CSV write");
    }
    w.into_inner().expect("in-memory CSV flush")
}

fn num(x: f64) -> String {
    format!("{x}")
}

pub fn json_bytes<T: Serialize>(value: &T) -> Vec<u8> {
    let mut out = serde_json::to_vec_pretty(value).expect("artifact serialises to JSON");
    out.push(b'\n');
    out
}

pub fn read_json<T: for<'de> Deserialize<'de>>(bytes: &[u8], path: &Path) -> Result<T> {
    serde_json::from_slice(bytes).map_err(|source| PipelineError::Json {
        path: path.to_path_buf(),
        source,
    })
}

fn parse_error(path: &Path, line: u64, message: impl Into<String>) -> PipelineError {
    PipelineError::Parse {
        path: path.to_path_buf(),
        line,
        message: message.into(),
    }
}

/// Header names and `(line, record)` rows.
type Records = (Vec<String>, Vec<(u64, csv::StringRecord)>);

fn records(bytes: &[u8], path: &Path) -> Result<Records> {
    let mut rdr = csv::ReaderBuilder::new().comment(Some(b'#')).from_reader(bytes);
    let headers = rdr
        .headers()
        .map_err(|e| parse_error(path, 1, e.to_string()))?
        .iter()
        .map(str::to_owned)
        .collect();
    let mut rows = Vec::new();
    for r in rdr.records() {
        let r = r.map_err(|e| parse_error(path, e.position().map_or(0, |p| p.line()), e.to_string()))?;
        rows.push((r.position().map_or(0, |p| p.line()), r));
    }
    Ok((headers, rows))
}

fn parse_f64(s: &str, path: &Path, line: u64) -> Result<f64> {
    s.parse().map_err(|_| parse_error(path, line, format!("bad number `{s}`")))
}

fn dated_matrix(assets: &[String], dates: &[NaiveDate], columns: &[Vec<f64>]) -> Vec<u8> {
    let header = std::iter::once("week_end".to_owned()).chain(assets.iter().cloned()).collect();
    let rows = dates.iter().enumerate().map(|(t, d)| {
        std::iter::once(d.format(DATE_FORMAT).to_string())
            .chain(columns.iter().map(|c| num(c[t])))
            .collect()
    });
    csv_bytes(std::iter::once(header).chain(rows))
}

type DatedMatrix = (Vec<String>, Vec<NaiveDate>, Vec<Vec<f64>>);

fn read_dated_matrix(bytes: &[u8], path: &Path) -> Result<DatedMatrix> {
    let (headers, rows) = records(bytes, path)?;
    if headers.first().map(String::as_str) != Some("week_end") {
        return Err(parse_error(path, 1, "first column must be `week_end`"));
    }
    let assets: Vec<String> = headers[1..].to_vec();
    let mut dates = Vec::with_capacity(rows.len());
    let mut columns = vec![Vec::with_capacity(rows.len()); assets.len()];
    for (line, r) in rows {
        if r.len() != headers.len() {
            return Err(parse_error(path, line, "wrong number of fields"));
        }
        dates.push(
            NaiveDate::parse_from_str(&r[0], DATE_FORMAT)
                .map_err(|e| parse_error(path, line, format!("bad date: {e}")))?,
        );
        for (k, col) in columns.iter_mut().enumerate() {
            col.push(parse_f64(&r[k + 1], path, line)?);
        }
    }
    Ok((assets, dates, columns))
}

/// `week_end` column followed by one price column per asset.
pub fn price_panel_csv(p: &PricePanel) -> Vec<u8> {
    dated_matrix(&p.assets, &p.weeks, &p.prices)
}

/// `week_end` column followed by one log-return column per asset.
pub fn return_panel_csv(r: &ReturnPanel) -> Vec<u8> {
    dated_matrix(&r.assets, &r.weeks, &r.returns)
}

pub fn read_return_panel(bytes: &[u8], path: &Path) -> Result<ReturnPanel> {
    let (assets, weeks, returns) = read_dated_matrix(bytes, path)?;
    Ok(ReturnPanel { assets, weeks, returns })
}

pub fn exclusions_json(e: &[Exclusion]) -> Vec<u8> {
    json_bytes(&e)
}

fn clamp_name(c: Option<AlphaClamp>) -> &'static str {
    match c {
        None => "",
        Some(AlphaClamp::Ceiling) => "ceiling",
        Some(AlphaClamp::TableEdge) => "table_edge",
        Some(AlphaClamp::Floor) => "floor",
    }
}

pub const SAMPLE_VECTOR_COLUMNS: [&str; 6] = [
    "asset_id",
    "year",
    "mean_return_pct",
    "std_pct",
    "alpha",
    "alpha_clamp",
];

/// One row per asset and year; `alpha_clamp` names the bound a fit was
/// clamped to, empty otherwise.
pub fn sample_vectors_csv(series: &[FittedSeries]) -> Vec<u8> {
    let header = SAMPLE_VECTOR_COLUMNS.iter().map(|s| s.to_string()).collect();
    let rows = series.iter().flat_map(|f| {
        f.series.vectors().iter().zip(&f.fits).map(move |(v, fit): (&SampleVector, &AlphaFit)| {
            vec![
                f.series.asset_id.clone(),
                v.year.to_string(),
                num(v.mean_return),
                num(v.std_dev),
                num(v.tail_alpha),
                clamp_name(fit.clamp).to_owned(),
            ]
        })
    });
    csv_bytes(std::iter::once(header).chain(rows))
}

/// Series in order of first appearance; the clamp column is optional.
pub fn read_sample_vectors(bytes: &[u8], path: &Path) -> Result<Vec<SampleVectorSeries>> {
    let (headers, rows) = records(bytes, path)?;
    if headers.len() < 5 || headers[..5] != SAMPLE_VECTOR_COLUMNS[..5] {
        return Err(parse_error(path, 1, format!("expected columns {:?}", &SAMPLE_VECTOR_COLUMNS[..5])));
    }
    let mut order: Vec<String> = Vec::new();
    let mut by_asset: BTreeMap<String, Vec<SampleVector>> = BTreeMap::new();
    for (line, r) in rows {
        let id = r[0].to_owned();
        let year: i32 = r[1].parse().map_err(|_| parse_error(path, line, "bad year"))?;
        let v = SampleVector {
            year,
            mean_return: parse_f64(&r[2], path, line)?,
            std_dev: parse_f64(&r[3], path, line)?,
            tail_alpha: parse_f64(&r[4], path, line)?,
        };
        if !by_asset.contains_key(&id) {
            order.push(id.clone());
        }
        by_asset.entry(id).or_default().push(v);
    }
    order
        .into_iter()
        .map(|id| {
            let vectors = by_asset.remove(&id).unwrap_or_default();
            SampleVectorSeries::new(id, vectors).map_err(|e| PipelineError::Invalid(format!("{}: {e}", path.display())))
        })
        .collect()
}

/// Square matrix with asset ids as the header row and first column.
fn labelled_matrix(labels: &[String], n: usize, at: impl Fn(usize, usize) -> f64) -> Vec<u8> {
    let header = std::iter::once(String::new()).chain(labels.iter().cloned()).collect();
    let rows = (0..n).map(|i| {
        std::iter::once(labels[i].clone())
            .chain((0..n).map(|j| num(at(i, j))))
            .collect()
    });
    csv_bytes(std::iter::once(header).chain(rows))
}

pub fn distance_matrix_csv(d: &DistanceMatrix) -> Vec<u8> {
    labelled_matrix(d.labels(), d.len(), |i, j| d.get(i, j))
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DistanceMatrixJson {
    pub labels: Vec<String>,
    pub metric: LocalMetric,
    pub rows: Vec<Vec<f64>>,
}

pub fn distance_matrix_json(d: &DistanceMatrix) -> Vec<u8> {
    json_bytes(&DistanceMatrixJson {
        labels: d.labels().to_vec(),
        metric: d.metric(),
        rows: (0..d.len()).map(|i| d.row(i).to_vec()).collect(),
    })
}

pub fn read_distance_matrix(bytes: &[u8], path: &Path) -> Result<DistanceMatrix> {
    let j: DistanceMatrixJson = read_json(bytes, path)?;
    DistanceMatrix::from_rows(j.labels, j.metric, j.rows.concat())
        .map_err(|e| PipelineError::Invalid(format!("{}: {e}", path.display())))
}

pub fn seriated_csv(s: &SeriatedMatrix) -> Vec<u8> {
    labelled_matrix(&s.labels, s.len(), |i, j| s.get(i, j))
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RbfJson {
    pub centers: Vec<[f64; 2]>,
    pub weights: Vec<f64>,
    pub a: f64,
    pub c0: Option<f64>,
    pub reg_alpha: f64,
    pub condition_estimate: Option<f64>,
}

pub fn rbf_json(m: &RbfModel) -> Vec<u8> {
    json_bytes(&RbfJson {
        centers: m.centers.clone(),
        weights: m.weights.clone(),
        a: m.shape,
        c0: m.constant,
        reg_alpha: m.reg_alpha,
        condition_estimate: m.diagnostics.map(|d| d.condition_estimate),
    })
}

/// Grid step, in matrix cells, of the exported surface.
pub const SURFACE_STEP: f64 = 0.5;

/// Modelled height on a grid over `[1, n]^2` next to the raw cell values.
pub fn surface_csv(m: &RbfModel, s: &SeriatedMatrix) -> Vec<u8> {
    let n = s.len();
    let steps = ((n - 1) as f64 / SURFACE_STEP).round() as usize;
    let header = ["x", "y", "height", "raw"].map(String::from).to_vec();
    let rows = (0..=steps).flat_map(move |a| {
        (0..=steps).map(move |b| {
            let (x, y) = (1.0 + a as f64 * SURFACE_STEP, 1.0 + b as f64 * SURFACE_STEP);
            let raw = if x.fract() == 0.0 && y.fract() == 0.0 {
                num(s.get(x as usize - 1, y as usize - 1))
            } else {
                String::new()
            };
            vec![num(x), num(y), num(m.evaluate(x, y)), raw]
        })
    });
    csv_bytes(std::iter::once(header).chain(rows))
}

pub fn ecdf_csv(c: &EcdfCurve) -> Vec<u8> {
    let header = ["rank", "value", "probability"].map(String::from).to_vec();
    let rows = c
        .values()
        .iter()
        .enumerate()
        .map(|(k, v)| vec![(k + 1).to_string(), num(*v), num(c.probability(k))]);
    csv_bytes(std::iter::once(header).chain(rows))
}

/// Everything `report` needs from one metric's segmentation.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MetricSegmentation {
    pub metric: LocalMetric,
    pub p_used: f64,
    pub d_bound: f64,
    pub kink: Option<Kink>,
    pub max_raw: f64,
    pub seriation: Vec<String>,
    pub core_ids: Vec<String>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SegmentationJson {
    pub universe: Vec<String>,
    pub metrics: Vec<MetricSegmentation>,
    pub intersection_core: Vec<String>,
    pub satellite: Vec<String>,
}

/// `asset_id,name` table.
pub fn read_names(bytes: &[u8], path: &Path) -> Result<Vec<(String, String)>> {
    let (headers, rows) = records(bytes, path)?;
    if headers.len() < 2 || headers[0] != "asset_id" || headers[1] != "name" {
        return Err(parse_error(path, 1, "expected columns asset_id,name"));
    }
    Ok(rows.into_iter().map(|(_, r)| (r[0].to_owned(), r[1].to_owned())).collect())
}

pub fn names_csv(names: &[(String, String)]) -> Vec<u8> {
    let header = vec!["asset_id".to_owned(), "name".to_owned()];
    csv_bytes(std::iter::once(header).chain(names.iter().map(|(a, n)| vec![a.clone(), n.clone()])))
}

/// One report row: membership per metric and the intersection label.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ReportRow {
    pub no: usize,
    pub id: String,
    pub name: String,
    pub membership: BTreeMap<String, bool>,
    pub intersection: String,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ReportThreshold {
    pub metric: LocalMetric,
    pub d_bound: f64,
    pub p_used: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Report {
    pub thresholds: Vec<ReportThreshold>,
    pub rows: Vec<ReportRow>,
}

impl Report {
    pub fn build(seg: &SegmentationJson, names: &BTreeMap<String, String>) -> Self {
        let thresholds = seg
            .metrics
            .iter()
            .map(|m| ReportThreshold {
                metric: m.metric,
                d_bound: m.d_bound,
                p_used: m.p_used,
            })
            .collect();
        let rows = seg
            .universe
            .iter()
            .enumerate()
            .map(|(k, id)| ReportRow {
                no: k + 1,
                id: id.clone(),
                name: names.get(id).cloned().unwrap_or_else(|| id.clone()),
                membership: seg
                    .metrics
                    .iter()
                    .map(|m| (m.metric.as_str().to_owned(), m.core_ids.contains(id)))
                    .collect(),
                intersection: if seg.intersection_core.contains(id) { "C" } else { "S" }.to_owned(),
            })
            .collect();
        Self { thresholds, rows }
    }

    /// Comment lines with threshold and ECDF level per metric, then
    /// `No.,ID,Name,<metric>...,Intersection` with 0/1 memberships.
    pub fn to_csv(&self) -> Vec<u8> {
        let mut out = Vec::new();
        let meta = |label: &str, f: &dyn Fn(&ReportThreshold) -> f64| {
            let cells: Vec<String> = self
                .thresholds
                .iter()
                .map(|t| format!("{}={:.6}", t.metric, f(t)))
                .collect();
            format!("# {label}: {}\n", cells.join(" "))
        };
        out.extend(meta("threshold", &|t| t.d_bound).into_bytes());
        out.extend(meta("p_used", &|t| t.p_used).into_bytes());
        let header = ["No.", "ID", "Name"]
            .iter()
            .map(|s| s.to_string())
            .chain(self.thresholds.iter().map(|t| t.metric.as_str().to_owned()))
            .chain(std::iter::once("Intersection".to_owned()))
            .collect();
        let rows = self.rows.iter().map(|r| {
            [r.no.to_string(), r.id.clone(), r.name.clone()]
                .into_iter()
                .chain(
                    self.thresholds
                        .iter()
                        .map(|t| if r.membership[t.metric.as_str()] { "1" } else { "0" }.to_owned()),
                )
                .chain(std::iter::once(r.intersection.clone()))
                .collect()
        });
        out.extend(csv_bytes(std::iter::once(header).chain(rows)));
        out
    }
}
