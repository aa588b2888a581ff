//! Numerical dynamics: torus rotations, the Heisenberg nilflow, averages
//! along polynomial times, limit formulas, seminorms and equidistribution.
//!
//! Exact coefficients enter as doubles with tau bound to pi.

mod average;
mod checks;
mod equidist;
mod flow;
mod kronecker;
mod observable;
mod sampling;
mod seminorm;

use thiserror::Error;

use crate::polyfam::PolyError;

pub use average::{multi_average, multi_average_l2, x_grid, AverageEstimate, L2Deviation, RealFamily};
pub use checks::{seminorm_bound_check, vdc_check, SeminormBoundReport, VdcReport, DEFAULT_SLACK};
pub use equidist::{
    dyadic_discrepancy, heisenberg_factor_check, path_discrepancy, DiscrepancyReport, DyadicBox,
    HeisenbergReport, DEFAULT_BINS, DEFAULT_DEPTH,
};
pub use flow::{
    circle_dist, frac, heis_inv, integer_relation, heis_mul, heis_reduce, looks_rational, Flow, FlowSpec, Heis,
    HeisenbergFlow, TorusFlow,
};
pub use kronecker::{kronecker_limit, KroneckerLimit, KroneckerOptions, Quadrature};
pub use observable::{e, product_of_integrals, BoxIndicator, Observable, SmoothedBox, Term, TrigPoly};
pub use sampling::{Moments, SamplingPlan, Scheme};
pub use seminorm::{hk_seminorm, hk_seminorm_with, SeminormMethod, SeminormValue};

#[derive(Debug, Error)]
pub enum FlowError {
    #[error("{what}: expected {expected}, found {found}")]
    DimensionMismatch {
        what: &'static str,
        expected: usize,
        found: usize,
    },
    #[error("non-ergodic input: {0}")]
    NonErgodic(String),
    #[error("invalid observable: {0}")]
    InvalidObservable(String),
    #[error("invalid plan: {0}")]
    InvalidPlan(String),
    #[error(transparent)]
    Poly(#[from] PolyError),
}
