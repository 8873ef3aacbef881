//! Core/satellite segmentation of an asset universe.
//!
//! Every asset is summarised per calendar year by the sample vector
//! `(mean return, standard deviation, stable tail alpha)`. Pairs of assets are
//! compared by the dynamic-time-warping distance between their yearly vector
//! series, the resulting distance matrix is seriated and min-max normalised,
//! a Gaussian radial-basis-function surface is fitted over it, and the core is
//! the leading square block of the seriated order whose modelled height stays
//! below a threshold taken from the empirical distribution of the distances.
//!
//! This crate is `no_std` and only needs `alloc`. File formats, ingestion of
//! price data and the command line live in the `coresat` companion crate.

#![no_std]
#![forbid(unsafe_code)]
// `!(x > 0.0)` style checks also reject NaN
#![allow(clippy::neg_cmp_op_on_partial_ord)]

extern crate alloc;

pub mod dtw;
pub mod error;
pub mod linalg;
pub mod pipeline;
pub mod rbf;
pub mod segmentation;
pub mod seriation;
pub mod stable;
pub mod stats;

pub use dtw::{DistanceMatrix, LocalMetric};
pub use error::{Error, Result};
pub use pipeline::{MetricOutcome, SegmentationSettings, UniverseOutcome};
pub use rbf::{RbfModel, SurfaceSample};
pub use segmentation::{EcdfCurve, Kink, MetricCore, SegmentationResult};
pub use seriation::SeriatedMatrix;
pub use stats::{SampleVector, SampleVectorSeries, StableParams};
