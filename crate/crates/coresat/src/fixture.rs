//! Synthetic daily-price universe with a planted core.
//!
//! Twenty assets follow one shared yearly (mean, spread, alpha) path up to
//! small noise; seven follow divergent paths. A further asset has a six-week
//! hole and must be excluded by the gap rule. Prices are quoted in USD and
//! come with a weekday-only USD to EUR rate table.

use std::path::{Path, PathBuf};

use chrono::{Datelike, Days, NaiveDate, Weekday};
use coresat_core::stable::StableSampler;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::config::PipelineConfig;
use crate::error::{PipelineError, Result};
use crate::ingest::DATE_FORMAT;

pub const FIXTURE_SEED: u64 = 5;

/// Ticker and name in reporting order.
pub const ASSETS: [(&str, &str); 27] = [
    ("ANC", "Anoncoin"),
    ("BTB", "BitBar"),
    ("BTC", "Bitcoin"),
    ("CSC", "CasinoCoin"),
    ("DEM", "Deutsche.eMark"),
    ("DMD", "Diamond"),
    ("DGC", "Digitalcoin"),
    ("DOGE", "Dogecoin"),
    ("FTC", "Feathercoin"),
    ("FLO", "FLO"),
    ("FRC", "Freicoin"),
    ("GLC", "GoldCoin"),
    ("IFC", "Infinitecoin"),
    ("LTC", "Litecoin"),
    ("MEC", "Megacoin"),
    ("NMC", "Namecoin"),
    ("NVC", "Novacoin"),
    ("NXT", "Nxt"),
    ("OMNI", "Omni"),
    ("PPC", "Peercoin"),
    ("XPM", "Primecoin"),
    ("QRK", "Quark"),
    ("XRP", "Ripple"),
    ("TAG", "TagCoin"),
    ("TRC", "Terracoin"),
    ("WDC", "WorldCoin"),
    ("ZET", "Zetacoin"),
];

/// Divergent assets, in the order their dynamics are listed below.
pub const OUTSIDERS: [&str; 7] = ["DMD", "FRC", "CSC", "IFC", "XRP", "TAG", "WDC"];

/// Asset whose price file has a gap longer than the fill limit.
pub const EXCLUDED: (&str, &str) = ("PND", "Pandacoin");

/// Assets with a short hole (weeks) that gap filling must bridge.
const SHORT_GAPS: [(&str, usize); 3] = [("BTB", 2), ("NXT", 3), ("WDC", 4)];
const EXCLUDED_GAP: usize = 6;

pub fn planted_core() -> Vec<&'static str> {
    ASSETS.iter().map(|a| a.0).filter(|id| !OUTSIDERS.contains(id)).collect()
}

pub fn start() -> NaiveDate {
    NaiveDate::from_ymd_opt(2014, 1, 1).expect("valid date")
}

pub fn end() -> NaiveDate {
    NaiveDate::from_ymd_opt(2019, 6, 1).expect("valid date")
}

/// Shared yearly (mean %, std %, alpha) of the core, 2014 to 2019.
const CORE_DYNAMICS: [(f64, f64, f64); 6] = [
    (-6.5, 22.0, 1.95),
    (-0.1, 24.5, 1.95),
    (0.0, 12.5, 2.0),
    (4.1, 31.0, 1.95),
    (-3.4, 21.5, 2.0),
    (0.9, 18.7, 1.95),
];

const OUTSIDER_DYNAMICS: [[(f64, f64, f64); 6]; 7] = [
    // DMD-like, swings exaggerated
    [(-1.5, 45.0, 1.81), (4.5, 22.96, 0.9), (-3.5, 6.0, 2.0), (11.5, 12.0, 2.0), (-9.0, 45.0, 0.9), (3.5, 8.0, 2.0)],
    // FRC-like
    [(-7.10, 18.74, 2.0), (-1.62, 20.27, 1.44), (-0.25, 59.19, 0.63), (5.92, 44.84, 1.18), (-1.97, 29.43, 1.51), (5.05, 104.04, 0.90)],
    [(2.0, 45.0, 1.1), (-6.0, 60.0, 0.9), (3.0, 35.0, 1.9), (12.0, 70.0, 1.0), (-8.0, 40.0, 1.9), (-2.0, 50.0, 1.0)],
    [(-9.0, 10.0, 1.3), (4.0, 12.0, 2.0), (-5.0, 40.0, 0.8), (2.0, 15.0, 2.0), (6.0, 55.0, 0.9), (3.0, 9.0, 1.4)],
    [(6.0, 35.0, 2.0), (5.0, 50.0, 2.0), (-6.0, 65.0, 1.1), (-2.0, 25.0, 0.8), (9.0, 30.0, 1.1), (-6.0, 70.0, 2.0)],
    [(-1.0, 70.0, 0.9), (-8.0, 15.0, 1.6), (7.0, 20.0, 1.0), (15.0, 90.0, 1.5), (-1.0, 12.0, 0.8), (8.0, 40.0, 1.2)],
    [(3.0, 12.0, 2.0), (9.0, 80.0, 0.8), (-9.0, 30.0, 1.4), (0.0, 45.0, 2.0), (-10.0, 85.0, 1.0), (1.0, 25.0, 1.7)],
];

fn uniform(rng: &mut ChaCha8Rng) -> f64 {
    loop {
        let u: f64 = rng.random();
        if u > 0.0 && u < 1.0 {
            return u;
        }
    }
}

fn sundays(from: NaiveDate, to: NaiveDate) -> Vec<NaiveDate> {
    from.iter_days()
        .take_while(|d| *d <= to)
        .filter(|d| d.weekday() == Weekday::Sun)
        .collect()
}

/// Log price at every Sunday of the window; the return into each Sunday
/// follows that Sunday's calendar-year parameters.
fn weekly_log_path(rng: &mut ChaCha8Rng, params: &[(f64, f64, f64); 6], weeks: &[NaiveDate]) -> Vec<f64> {
    let mut level = rng.random_range(-3.0..6.0);
    let mut path = vec![level];
    for d in &weeks[1..] {
        let (m, s, a) = params[(d.year() - 2014) as usize];
        let sampler = StableSampler::new(a, 0.0, s / 100.0 / std::f64::consts::SQRT_2, m / 100.0)
            .expect("fixture parameters are valid");
        level += sampler.sample(|| uniform(rng)).clamp(-2.5, 2.5);
        path.push(level);
    }
    path
}

/// Daily closes: linear in log price between Sundays, flat at the ends.
fn daily_from_weekly(weeks: &[NaiveDate], path: &[f64], days: &[NaiveDate]) -> Vec<f64> {
    days.iter()
        .map(|d| {
            let k = weeks.partition_point(|w| w <= d);
            if k == 0 {
                path[0]
            } else if k == weeks.len() {
                path[k - 1]
            } else {
                let t = (*d - weeks[k - 1]).num_days() as f64 / 7.0;
                path[k - 1] + t * (path[k] - path[k - 1])
            }
            .exp()
        })
        .collect()
}

/// The `(sunday - 6) ..= sunday of week k + weeks - 1` span of a hole.
fn hole(weeks: &[NaiveDate], at: usize, len: usize) -> (NaiveDate, NaiveDate) {
    (weeks[at] - Days::new(6), weeks[at + len - 1])
}

fn write_file(path: &Path, text: &str) -> Result<()> {
    std::fs::write(path, text).map_err(|e| PipelineError::io(path, e))
}

fn price_file(days: &[NaiveDate], closes: &[f64], keep: impl Fn(usize) -> bool) -> String {
    let mut out = String::from("date,close,volume\n");
    for (k, (d, c)) in days.iter().zip(closes).enumerate() {
        if keep(k) {
            out.push_str(&format!("{},{c},{}\n", d.format(DATE_FORMAT), 1000 + k));
        }
    }
    out
}

/// Writes `data/<ID>.csv`, `fx.csv`, `names.csv` and `coresat.toml` under
/// `dir` and returns the config the TOML file describes.
pub fn write_fixture(dir: &Path, seed: u64) -> Result<PipelineConfig> {
    let data = dir.join("data");
    std::fs::create_dir_all(&data).map_err(|e| PipelineError::io(&data, e))?;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let days: Vec<NaiveDate> = start().iter_days().take_while(|d| *d <= end()).collect();
    let weeks = sundays(start(), end());

    let mut names = String::from("asset_id,name\n");
    for (id, name) in ASSETS.iter().chain(std::iter::once(&EXCLUDED)) {
        names.push_str(&format!("{id},{name}\n"));
    }
    write_file(&dir.join("names.csv"), &names)?;

    for &(id, _) in ASSETS.iter().chain(std::iter::once(&EXCLUDED)) {
        let params = match OUTSIDERS.iter().position(|o| *o == id) {
            Some(k) => OUTSIDER_DYNAMICS[k],
            None => CORE_DYNAMICS.map(|(m, s, a)| {
                (
                    m + rng.random_range(-0.3..0.3),
                    s * (1.0 + rng.random_range(-0.05..0.05)),
                    (a + rng.random_range(-0.03..0.03)).min(2.0),
                )
            }),
        };
        let path = weekly_log_path(&mut rng, &params, &weeks);
        let closes = daily_from_weekly(&weeks, &path, &days);
        let gap = if id == EXCLUDED.0 {
            Some(EXCLUDED_GAP)
        } else {
            SHORT_GAPS.iter().find(|g| g.0 == id).map(|g| g.1)
        };
        let hole = gap.map(|len| hole(&weeks, rng.random_range(20..weeks.len() - 20), len));
        // a few missing days everywhere, never in the first week
        let dropped: Vec<bool> = days.iter().map(|d| *d > weeks[0] && rng.random::<f64>() < 0.03).collect();
        let text = price_file(&days, &closes, |k| {
            !dropped[k] && !hole.is_some_and(|(a, b)| days[k] >= a && days[k] <= b)
        });
        write_file(&data.join(format!("{id}.csv")), &text)?;
    }

    // USD to EUR on weekdays only; weekends carry the Friday rate
    let mut fx = String::from("date,rate\n");
    let mut rate: f64 = 0.73;
    for d in &days {
        rate *= rng.random_range(-0.004f64..0.004).exp();
        if !matches!(d.weekday(), Weekday::Sat | Weekday::Sun) {
            fx.push_str(&format!("{},{rate:.5}\n", d.format(DATE_FORMAT)));
        }
    }
    write_file(&dir.join("fx.csv"), &fx)?;

    let config = PipelineConfig {
        data_dir: PathBuf::from("data"),
        fx_file: Some(PathBuf::from("fx.csv")),
        names_file: Some(PathBuf::from("names.csv")),
        output_dir: PathBuf::from("out"),
        ..PipelineConfig::default()
    };
    let toml = format!("# synthetic fixture, seed {seed}\n{}", config.to_toml());
    write_file(&dir.join("coresat.toml"), &toml)?;
    let mut resolved = config;
    resolved.resolve_relative(dir);
    Ok(resolved)
}
