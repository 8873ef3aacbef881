use std::path::PathBuf;

use chrono::NaiveDate;

pub type Result<T, E = PipelineError> = std::result::Result<T, E>;

#[derive(Debug, thiserror::Error)]
pub enum PipelineError {
    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
    #[error("{path}, line {line}: {message}")]
    Parse {
        path: PathBuf,
        line: u64,
        message: String,
    },
    #[error("{path}: duplicate date {date} on line {line}")]
    DuplicateDate {
        path: PathBuf,
        line: u64,
        date: NaiveDate,
    },
    #[error("{path}, line {line}: non-positive price {value}")]
    NonPositivePrice {
        path: PathBuf,
        line: u64,
        value: f64,
    },
    #[error("no exchange rate at or before {date} for {asset}")]
    NoFxRate { asset: String, date: NaiveDate },
    #[error("empty series: {0}")]
    EmptySeries(String),
    #[error("config: {0}")]
    Config(String),
    #[error("missing {path}; run `coresat {stage}` first")]
    MissingArtifact { path: PathBuf, stage: &'static str },
    #[error("{stage}: {error}")]
    Stage {
        stage: &'static str,
        error: coresat_core::Error,
    },
    #[error("{path}: {source}")]
    Json {
        path: PathBuf,
        #[source]
        source: serde_json::Error,
    },
    #[error("{0}")]
    Invalid(String),
}

impl PipelineError {
    pub fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Self::Io {
            path: path.into(),
            source,
        }
    }
}

/// Attaches a stage name to core errors.
pub(crate) trait StageContext<T> {
    fn stage(self, stage: &'static str) -> Result<T>;
}

impl<T> StageContext<T> for coresat_core::Result<T> {
    fn stage(self, stage: &'static str) -> Result<T> {
        self.map_err(|error| PipelineError::Stage { stage, error })
    }
}
