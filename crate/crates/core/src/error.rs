use alloc::boxed::Box;
use alloc::string::String;
use core::fmt;

pub type Result<T> = core::result::Result<T, Error>;

#[derive(Debug, Clone, PartialEq)]
#[non_exhaustive]
pub enum Error {
    /// Input collection was empty where at least one element is required.
    Empty(&'static str),
    /// A yearly bucket holds fewer weekly returns than the tail fit needs.
    TooFewObservations { year: i32, needed: usize, got: usize },
    /// All values of a bucket are identical; no quantile spread to fit.
    DegenerateBucket,
    /// Two series that must be aligned have different lengths.
    LengthMismatch { left: usize, right: usize },
    /// Two series that must be aligned cover different years.
    YearMismatch { left: i32, right: i32 },
    /// Exhaustive path enumeration requested for a series that is too long.
    SeriesTooLong { len: usize, max: usize },
    /// A standardisation variable has zero pooled variance.
    ZeroVariance(&'static str),
    /// Every off-diagonal distance is zero.
    DegenerateMatrix,
    /// A numeric argument is outside its admissible range.
    InvalidParameter {
        name: &'static str,
        value: f64,
        expected: &'static str,
    },
    /// The centre frame spacing is too large for the matrix.
    DegenerateFrame { spacing: f64, size: usize },
    /// The regularised normal equations could not be factorised.
    SingularSystem { reg_alpha: f64 },
    /// The ECDF has no kink inside the search window.
    NoKink { window: (f64, f64) },
    /// Per-metric cores refer to different universes.
    UniverseMismatch,
    /// An error raised while processing one asset/year.
    Asset {
        asset: String,
        year: Option<i32>,
        source: Box<Error>,
    },
}

impl Error {
    pub(crate) fn in_asset(self, asset: &str, year: Option<i32>) -> Self {
        Error::Asset {
            asset: asset.into(),
            year,
            source: Box::new(self),
        }
    }
}

impl fmt::Display for Error {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Error::Empty(what) => write!(f, "empty input: {what}"),
            Error::TooFewObservations { year, needed, got } => write!(
                f,
                "year {year} has {got} weekly returns, at least {needed} are needed to fit alpha"
            ),
            Error::DegenerateBucket => write!(f, "degenerate bucket: all returns identical"),
            Error::LengthMismatch { left, right } => {
                write!(f, "series length mismatch: {left} vs {right}")
            }
            Error::YearMismatch { left, right } => {
                write!(f, "series year grids differ: {left} vs {right}")
            }
            Error::SeriesTooLong { len, max } => write!(
                f,
                "series of length {len} is too long for path enumeration (max {max})"
            ),
            Error::ZeroVariance(var) => write!(f, "zero pooled variance in {var}"),
            Error::DegenerateMatrix => write!(
                f,
                "all distances are zero (universe of identical assets), cannot normalise"
            ),
            Error::InvalidParameter {
                name,
                value,
                expected,
            } => write!(f, "invalid {name} = {value}, expected {expected}"),
            Error::DegenerateFrame { spacing, size } => write!(
                f,
                "centre spacing {spacing} must be smaller than the matrix size {size}"
            ),
            Error::SingularSystem { reg_alpha } => write!(
                f,
                "singular RBF system at reg_alpha = {reg_alpha}; use a positive reg_alpha"
            ),
            Error::NoKink { window } => write!(
                f,
                "no kink in ECDF window [{}, {}]; pass an explicit p",
                window.0, window.1
            ),
            Error::UniverseMismatch => write!(f, "metric cores cover different universes"),
            Error::Asset {
                asset,
                year: Some(year),
                source,
            } => write!(f, "asset {asset}, year {year}: {source}"),
            Error::Asset {
                asset,
                year: None,
                source,
            } => write!(f, "asset {asset}: {source}"),
        }
    }
}

impl core::error::Error for Error {
    fn source(&self) -> Option<&(dyn core::error::Error + 'static)> {
        match self {
            Error::Asset { source, .. } => Some(source.as_ref()),
            _ => None,
        }
    }
}
