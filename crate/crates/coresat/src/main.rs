use std::path::PathBuf;
use std::process::ExitCode;

use anyhow::Context;
use chrono::NaiveDate;
use clap::{Args, Parser, Subcommand};
use coresat::config::{PipelineConfig, EXAMPLE};
use coresat::fixture;
use coresat::stages::Pipeline;
use coresat_core::LocalMetric;

/// Core/satellite segmentation of an asset universe from daily prices.
#[derive(Parser)]
#[command(name = "coresat", version)]
struct Cli {
    #[command(flatten)]
    overrides: Overrides,
    #[command(subcommand)]
    command: Command,
}

/// Settings that replace the matching config entries.
#[derive(Args, Default)]
struct Overrides {
    /// TOML config, or a manifest.json from an earlier run
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    #[arg(long, global = true)]
    data_dir: Option<PathBuf>,
    #[arg(long, global = true)]
    fx_file: Option<PathBuf>,
    #[arg(long, global = true)]
    names_file: Option<PathBuf>,
    #[arg(long, global = true)]
    output_dir: Option<PathBuf>,
    #[arg(long, global = true)]
    start: Option<NaiveDate>,
    #[arg(long, global = true)]
    end: Option<NaiveDate>,
    /// Weekday of the weekly observations
    #[arg(long, global = true)]
    anchor: Option<String>,
    /// Longest run of missing weeks filled forward
    #[arg(long, global = true)]
    max_gap: Option<usize>,
    /// Restrict to these metrics (repeatable)
    #[arg(long = "metric", global = true)]
    metrics: Vec<LocalMetric>,
    /// Skip z-scoring of the sample vectors before DTW
    #[arg(long, global = true)]
    no_standardize: bool,
    #[arg(long, global = true)]
    frame_spacing: Option<f64>,
    /// Height a basis function keeps at the neighbouring centre
    #[arg(long, global = true)]
    residual: Option<f64>,
    #[arg(long, global = true)]
    reg_alpha: Option<f64>,
    /// Fit the surface without a constant term
    #[arg(long, global = true)]
    no_constant: bool,
    /// ECDF band searched for the kink, as LO,HI
    #[arg(long, global = true, value_parser = parse_window)]
    kink_window: Option<(f64, f64)>,
    /// Search the lower kink (0.05,0.40) for the tight inner core
    #[arg(long, global = true, conflicts_with = "kink_window")]
    lower_kink: bool,
    /// Fixed ECDF level for a metric, skipping kink detection
    #[arg(long = "p", global = true, value_name = "METRIC=P", value_parser = parse_fixed_p)]
    fixed_p: Vec<(LocalMetric, f64)>,
}

#[derive(Subcommand)]
enum Command {
    /// Read price files, resample weekly, fill gaps, write log returns
    Ingest,
    /// Yearly mean, spread and tail alpha per asset
    Stats,
    /// DTW distance matrices
    Dtw,
    /// Seriation, surface fit, threshold and cores per metric
    Segment,
    /// Core/satellite table
    Report,
    /// All stages in order
    Run,
    /// Print configuration
    Config {
        /// Commented defaults instead of the effective config
        #[arg(long)]
        example: bool,
    },
    /// Write the synthetic daily-price fixture and its config
    Fixture {
        #[arg(long)]
        out: PathBuf,
        #[arg(long, default_value_t = fixture::FIXTURE_SEED)]
        seed: u64,
    },
}

fn parse_window(s: &str) -> Result<(f64, f64), String> {
    let (a, b) = s.split_once(',').ok_or("expected LO,HI")?;
    let lo = a.trim().parse::<f64>().map_err(|e| e.to_string())?;
    let hi = b.trim().parse::<f64>().map_err(|e| e.to_string())?;
    Ok((lo, hi))
}

fn parse_fixed_p(s: &str) -> Result<(LocalMetric, f64), String> {
    let (m, p) = s.split_once('=').ok_or("expected METRIC=P")?;
    let metric = m.trim().parse::<LocalMetric>().map_err(|e| e.to_string())?;
    let p = p.trim().parse::<f64>().map_err(|e| e.to_string())?;
    Ok((metric, p))
}

impl Overrides {
    fn apply(self, mut c: PipelineConfig) -> PipelineConfig {
        if let Some(v) = self.data_dir {
            c.data_dir = v;
        }
        if let Some(v) = self.fx_file {
            c.fx_file = Some(v);
        }
        if let Some(v) = self.names_file {
            c.names_file = Some(v);
        }
        if let Some(v) = self.output_dir {
            c.output_dir = v;
        }
        if let Some(v) = self.start {
            c.window.start = v;
        }
        if let Some(v) = self.end {
            c.window.end = v;
        }
        if let Some(v) = self.anchor {
            c.weekly_anchor = v;
        }
        if let Some(v) = self.max_gap {
            c.max_gap = v;
        }
        let s = &mut c.segmentation;
        if !self.metrics.is_empty() {
            s.metrics = self.metrics;
        }
        if self.no_standardize {
            s.standardize = false;
        }
        if self.frame_spacing.is_some() {
            s.frame_spacing = self.frame_spacing;
        }
        if let Some(v) = self.residual {
            s.residual = v;
        }
        if let Some(v) = self.reg_alpha {
            s.reg_alpha = v;
        }
        if self.no_constant {
            s.constant_term = false;
        }
        if let Some((lo, hi)) = self.kink_window {
            s.kink_window = [lo, hi];
        }
        if self.lower_kink {
            s.kink_window = [0.05, 0.40];
        }
        for (m, p) in self.fixed_p {
            s.p.insert(m.as_str().to_owned(), p);
        }
        c
    }
}

fn effective_config(mut o: Overrides) -> anyhow::Result<PipelineConfig> {
    let base = match o.config.take() {
        Some(path) => PipelineConfig::load(&path)?,
        None => PipelineConfig::default(),
    };
    let c = o.apply(base);
    c.validate()?;
    Ok(c)
}

fn run(cli: Cli) -> anyhow::Result<()> {
    let name = match &cli.command {
        Command::Ingest => "ingest",
        Command::Stats => "stats",
        Command::Dtw => "dtw",
        Command::Segment => "segment",
        Command::Report => "report",
        Command::Run => "run",
        Command::Config { example } => {
            if *example {
                print!("{EXAMPLE}");
            } else {
                print!("{}", effective_config(cli.overrides)?.to_toml());
            }
            return Ok(());
        }
        Command::Fixture { out, seed } => {
            let config = fixture::write_fixture(out, *seed)
                .with_context(|| format!("writing fixture to {}", out.display()))?;
            println!(
                "fixture written to {}; run `coresat --config {} run`",
                out.display(),
                out.join("coresat.toml").display()
            );
            log::debug!("fixture config: {config:?}");
            return Ok(());
        }
    };
    // a dtw restricted by --metric only narrows that stage
    let dtw_metrics = (!cli.overrides.metrics.is_empty()).then(|| cli.overrides.metrics.clone());
    let config = effective_config(cli.overrides)?;
    let mut pipeline = Pipeline::new(name, config)?;
    match cli.command {
        Command::Ingest => pipeline.ingest()?,
        Command::Stats => pipeline.stats()?,
        Command::Dtw => pipeline.dtw(dtw_metrics.as_deref())?,
        Command::Segment => pipeline.segment()?,
        Command::Report | Command::Run => {
            let report = if name == "run" { pipeline.run()? } else { pipeline.report()? };
            let core: Vec<&str> = report
                .rows
                .iter()
                .filter(|r| r.intersection == "C")
                .map(|r| r.id.as_str())
                .collect();
            println!("core ({}): {}", core.len(), core.join(" "));
        }
        Command::Config { .. } | Command::Fixture { .. } => unreachable!("handled above"),
    }
    pipeline.finish()?;
    Ok(())
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    match run(Cli::parse()) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::FAILURE
        }
    }
}
