//! Pipeline stages. Each stage reads the artifacts of the one before it from
//! the output directory, so `ingest`, `stats`, `dtw`, `segment` and `report`
//! run in sequence produce the same files as `run`.

use std::collections::BTreeMap;
use std::path::{Path, PathBuf};
use std::time::Instant;

use coresat_core::pipeline::{distance_matrices, segment_metric};
use coresat_core::segmentation::intersect;
use coresat_core::stats::{build_sample_series, AssetReturns};
use coresat_core::{DistanceMatrix, LocalMetric, SegmentationSettings};

use crate::config::PipelineConfig;
use crate::error::{PipelineError, Result, StageContext};
use crate::formats::{self, MetricSegmentation, Report, SegmentationJson};
use crate::ingest::{self, WeekGrid};
use crate::manifest::{RunManifest, MANIFEST_FILE};
use crate::svg;

pub const WEEKLY_PRICES: &str = "weekly_prices.csv";
pub const RETURNS: &str = "returns.csv";
pub const EXCLUSIONS: &str = "exclusions.json";
pub const SAMPLE_VECTORS: &str = "sample_vectors.csv";
pub const SEGMENTATION: &str = "segmentation.json";
pub const REPORT_CSV: &str = "core_satellite.csv";
pub const REPORT_JSON: &str = "core_satellite.json";

pub fn distances_json(m: LocalMetric) -> String {
    format!("distances_{m}.json")
}

/// One invocation of the pipeline against a config.
pub struct Pipeline {
    config: PipelineConfig,
    settings: SegmentationSettings,
    manifest: RunManifest,
}

impl Pipeline {
    /// Validates the whole config before anything is read.
    pub fn new(command: &str, config: PipelineConfig) -> Result<Self> {
        config.validate()?;
        let settings = config.segmentation.to_settings()?;
        Ok(Self {
            manifest: RunManifest::new(command, config.clone()),
            config,
            settings,
        })
    }

    pub fn config(&self) -> &PipelineConfig {
        &self.config
    }

    pub fn manifest(&self) -> &RunManifest {
        &self.manifest
    }

    fn out(&self, name: &str) -> PathBuf {
        self.config.output_dir.join(name)
    }

    fn write(&mut self, name: &str, bytes: &[u8]) -> Result<()> {
        let path = self.out(name);
        std::fs::write(&path, bytes).map_err(|e| PipelineError::io(&path, e))?;
        self.manifest.record_artifact(name, bytes);
        Ok(())
    }

    fn read_input(&mut self, path: &Path) -> Result<Vec<u8>> {
        let bytes = std::fs::read(path).map_err(|e| PipelineError::io(path, e))?;
        self.manifest.record_input(path, &bytes);
        Ok(bytes)
    }

    /// Reads an upstream artifact; a missing file names the stage that makes it.
    fn read_artifact(&mut self, name: &str, producer: &'static str) -> Result<Vec<u8>> {
        let path = self.out(name);
        match std::fs::read(&path) {
            Ok(bytes) => {
                self.manifest.record_input(&path, &bytes);
                Ok(bytes)
            }
            Err(e) if e.kind() == std::io::ErrorKind::NotFound => Err(PipelineError::MissingArtifact {
                path,
                stage: producer,
            }),
            Err(e) => Err(PipelineError::io(path, e)),
        }
    }

    fn timed<T>(&mut self, stage: &str, f: impl FnOnce(&mut Self) -> Result<T>) -> Result<T> {
        let dir = self.config.output_dir.clone();
        std::fs::create_dir_all(&dir).map_err(|e| PipelineError::io(&dir, e))?;
        let t0 = Instant::now();
        let out = f(self)?;
        self.manifest.stages.push(crate::manifest::StageTiming {
            stage: stage.to_owned(),
            millis: t0.elapsed().as_secs_f64() * 1e3,
        });
        log::info!("{stage}: {:.1} ms", t0.elapsed().as_secs_f64() * 1e3);
        Ok(out)
    }

    fn names(&mut self) -> Result<Vec<(String, String)>> {
        match self.config.names_file.clone() {
            Some(p) => {
                let bytes = self.read_input(&p)?;
                formats::read_names(&bytes, &p)
            }
            None => Ok(Vec::new()),
        }
    }

    /// Price files of the data directory, sorted by name, minus the FX and
    /// names tables if they live there too.
    fn price_files(&self) -> Result<Vec<PathBuf>> {
        let dir = &self.config.data_dir;
        let skip: Vec<PathBuf> = [&self.config.fx_file, &self.config.names_file]
            .into_iter()
            .flatten()
            .filter_map(|p| p.canonicalize().ok())
            .collect();
        let mut files = Vec::new();
        for entry in std::fs::read_dir(dir).map_err(|e| PipelineError::io(dir, e))? {
            let path = entry.map_err(|e| PipelineError::io(dir, e))?.path();
            if path.extension().is_some_and(|e| e == "csv")
                && !path.canonicalize().is_ok_and(|c| skip.contains(&c))
            {
                files.push(path);
            }
        }
        files.sort();
        if files.is_empty() {
            return Err(PipelineError::EmptySeries(format!("no .csv price files in {}", dir.display())));
        }
        Ok(files)
    }

    pub fn ingest(&mut self) -> Result<()> {
        self.timed("ingest", |p| {
            let names = p.names()?;
            let fx = match p.config.fx_file.clone() {
                Some(path) => {
                    let bytes = p.read_input(&path)?;
                    Some(ingest::read_fx_csv(bytes.as_slice(), &path)?)
                }
                None => None,
            };
            let grid = WeekGrid::new(p.config.window.start, p.config.window.end, p.config.anchor()?)?;
            let mut rows = Vec::new();
            for path in p.price_files()? {
                let bytes = p.read_input(&path)?;
                let id = ingest::asset_id_of(&path)?;
                let mut series = ingest::read_price_csv(bytes.as_slice(), &path, id, &p.config.schema)?;
                if let Some(fx) = &fx {
                    series = ingest::convert_currency(&series, fx)?;
                }
                rows.push(ingest::resample_weekly(&series, &grid)?);
            }
            // names-file order first, then the rest by id
            let rank = |id: &str| names.iter().position(|(n, _)| n == id).unwrap_or(usize::MAX);
            rows.sort_by(|a, b| rank(&a.asset_id).cmp(&rank(&b.asset_id)).then(a.asset_id.cmp(&b.asset_id)));
            let filled = ingest::fill_gaps_locf(&rows, &grid, p.config.max_gap)?;
            for e in &filled.exclusions {
                log::warn!("excluded {}: {:?} ({} weeks)", e.asset_id, e.reason, e.gap_length);
            }
            let returns = ingest::log_returns(&filled.panel)?;
            p.write(WEEKLY_PRICES, &formats::price_panel_csv(&filled.panel))?;
            p.write(RETURNS, &formats::return_panel_csv(&returns))?;
            p.write(EXCLUSIONS, &formats::exclusions_json(&filled.exclusions))?;
            Ok(())
        })
    }

    pub fn stats(&mut self) -> Result<()> {
        self.timed("stats", |p| {
            let bytes = p.read_artifact(RETURNS, "ingest")?;
            let panel = formats::read_return_panel(&bytes, &p.out(RETURNS))?;
            let years = panel.week_years();
            let assets: Vec<AssetReturns<'_>> = panel
                .assets
                .iter()
                .zip(&panel.returns)
                .map(|(id, r)| AssetReturns {
                    asset_id: id,
                    returns: r,
                })
                .collect();
            let fitted = build_sample_series(&assets, &years, p.config.alpha_floor).stage("stats")?;
            let clamped = fitted
                .iter()
                .flat_map(|f| f.fits.iter())
                .filter(|f| f.clamp.is_some())
                .count();
            if clamped > 0 {
                log::info!("{clamped} tail fits clamped (see alpha_clamp column)");
            }
            p.write(SAMPLE_VECTORS, &formats::sample_vectors_csv(&fitted))
        })
    }

    /// Distance matrices for `metrics`, or for every configured metric.
    pub fn dtw(&mut self, metrics: Option<&[LocalMetric]>) -> Result<()> {
        self.timed("dtw", |p| {
            let bytes = p.read_artifact(SAMPLE_VECTORS, "stats")?;
            let series = formats::read_sample_vectors(&bytes, &p.out(SAMPLE_VECTORS))?;
            let mut settings = p.settings.clone();
            if let Some(m) = metrics {
                settings.metrics = m.to_vec();
            }
            let (_, matrices) = distance_matrices(&series, &settings).stage("dtw")?;
            for d in &matrices {
                let m = d.metric();
                p.write(&format!("distances_{m}.csv"), &formats::distance_matrix_csv(d))?;
                p.write(&distances_json(m), &formats::distance_matrix_json(d))?;
            }
            Ok(())
        })
    }

    pub fn segment(&mut self) -> Result<()> {
        self.timed("segment", |p| {
            let metrics = p.settings.metrics.clone();
            let mut matrices: Vec<DistanceMatrix> = Vec::new();
            for m in &metrics {
                let name = distances_json(*m);
                let bytes = p.read_artifact(&name, "dtw")?;
                matrices.push(formats::read_distance_matrix(&bytes, &p.out(&name))?);
            }
            let universe = matrices[0].labels().to_vec();
            if matrices.iter().any(|d| d.labels() != universe.as_slice()) {
                return Err(PipelineError::Invalid(
                    "distance matrices disagree on the asset universe; rerun `coresat dtw`".into(),
                ));
            }
            let mut summaries = Vec::new();
            let mut cores = Vec::new();
            for d in matrices {
                let o = segment_metric(d, &p.settings).stage("segment")?;
                let m = o.seriated.metric;
                if let Some(diag) = o.model.diagnostics.filter(|d| d.ill_conditioned()) {
                    log::warn!(
                        "{m}: RBF system ill-conditioned (estimate {:.3e}); consider reg_alpha > 0",
                        diag.condition_estimate
                    );
                }
                if o.core.is_empty() {
                    log::warn!("{m}: empty core at d_bound {:.4}", o.core.d_bound);
                }
                p.write(&format!("seriated_{m}.csv"), &formats::seriated_csv(&o.seriated))?;
                p.write(&format!("heatmap_{m}.svg"), svg::heatmap(&o.seriated).as_bytes())?;
                p.write(&format!("rbf_{m}.json"), &formats::rbf_json(&o.model))?;
                p.write(&format!("surface_{m}.csv"), &formats::surface_csv(&o.model, &o.seriated))?;
                p.write(
                    &format!("surface_{m}.svg"),
                    svg::surface(&o.model, &o.seriated, o.core.d_bound, o.core.core_ids.len()).as_bytes(),
                )?;
                p.write(&format!("ecdf_{m}.csv"), &formats::ecdf_csv(&o.ecdf))?;
                p.write(
                    &format!("ecdf_{m}.svg"),
                    svg::ecdf(&o.ecdf, o.core.d_bound, o.core.p_used, o.kink.as_ref(), m.as_str()).as_bytes(),
                )?;
                summaries.push(MetricSegmentation {
                    metric: m,
                    p_used: o.core.p_used,
                    d_bound: o.core.d_bound,
                    kink: o.kink,
                    max_raw: o.seriated.max_raw,
                    seriation: o.seriated.labels.clone(),
                    core_ids: o.core.core_ids.clone(),
                });
                cores.push(o.core);
            }
            let result = intersect(&universe, cores).stage("segment")?;
            let seg = SegmentationJson {
                universe: result.universe,
                metrics: summaries,
                intersection_core: result.intersection_core,
                satellite: result.satellite,
            };
            p.write(SEGMENTATION, &formats::json_bytes(&seg))
        })
    }

    pub fn report(&mut self) -> Result<Report> {
        self.timed("report", |p| {
            let bytes = p.read_artifact(SEGMENTATION, "segment")?;
            let seg: SegmentationJson = formats::read_json(&bytes, &p.out(SEGMENTATION))?;
            let names: BTreeMap<String, String> = p.names()?.into_iter().collect();
            let report = Report::build(&seg, &names);
            p.write(REPORT_CSV, &report.to_csv())?;
            p.write(REPORT_JSON, &formats::json_bytes(&report))?;
            Ok(report)
        })
    }

    pub fn run(&mut self) -> Result<Report> {
        self.ingest()?;
        self.stats()?;
        self.dtw(None)?;
        self.segment()?;
        self.report()
    }

    /// Writes `manifest.json`; call once at the end of an invocation.
    pub fn finish(self) -> Result<RunManifest> {
        let path = self.out(MANIFEST_FILE);
        std::fs::write(&path, formats::json_bytes(&self.manifest)).map_err(|e| PipelineError::io(&path, e))?;
        Ok(self.manifest)
    }
}
