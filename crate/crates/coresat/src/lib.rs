//! Price ingestion, artifact formats, SVG plots and pipeline stages around
//! `coresat-core`.

#![forbid(unsafe_code)]
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod error;
pub mod formats;
pub mod config;
pub mod ingest;
pub mod fixture;
pub mod manifest;
pub mod stages;
pub mod svg;

pub use error::{PipelineError, Result};
