//! Subsets of the real line: exact interval arithmetic, upper Banach
//! density estimates, delta-thickenings, return-time densities along
//! polynomial families and syndeticity gap scans.
//!
//! All set algebra is exact over rational endpoints. Intervals are
//! half-open; thickenings are open sets and are stored half-open with the
//! same measure.

mod interval;
mod scan;

use serde::Serializer;
use thiserror::Error;

use crate::polyfam::coeff::{fmt_rational, Rational};
use crate::polyfam::PolyError;

pub use interval::{rational_from_f64, Interval, IntervalSet, SNAP_TOLERANCE};
pub use scan::{
    arithmetic_shape, return_density, return_set, syndetic_scan, upper_density, DensityEstimate,
    GapReport, ScanOptions, ScanPoint, ThresholdRule, TrendPoint, TrendStatus, WindowGrid,
};

#[derive(Debug, Error)]
pub enum DensityError {
    #[error("inverted interval [{lo}, {hi})")]
    InvertedInterval { lo: String, hi: String },
    #[error("{0} must be positive")]
    NonPositive(&'static str),
    #[error("non-finite endpoint")]
    NonFinite,
    #[error("line {line}: {message}")]
    Parse { line: usize, message: String },
    #[error("union of a periodic and a bounded set is not representable")]
    MixedUnion,
    #[error("periodic expansion too large")]
    TooLarge,
    #[error("expected a point with {expected} coordinates, found {found}")]
    DimensionMismatch { expected: usize, found: usize },
    #[error("member {0} has a non-rational value at the requested point")]
    NonRationalShift(usize),
    #[error("members with nonzero constant term (1-based): {0:?}")]
    ConstantTerms(Vec<usize>),
    #[error("scans support one-parameter families only, found {0} variables")]
    UnsupportedDimension(usize),
    #[error("family does not have the shape {{l p, m p, (l+m) p}}")]
    NotArithmeticShape,
    #[error(transparent)]
    Poly(#[from] PolyError),
}

pub(crate) fn ser_rat<S: Serializer>(r: &Rational, s: S) -> Result<S::Ok, S::Error> {
    s.serialize_str(&fmt_rational(r))
}

pub(crate) fn ser_opt_rat<S: Serializer>(r: &Option<Rational>, s: S) -> Result<S::Ok, S::Error> {
    match r {
        Some(r) => s.serialize_str(&fmt_rational(r)),
        None => s.serialize_none(),
    }
}
