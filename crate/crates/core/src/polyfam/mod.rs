//! Exact polynomial families: parsing, equivalence classes and weight
//! vectors, R-independence, independent decomposition, linearization and
//! linear changes of variables.

pub mod coeff;
pub mod decompose;
pub mod family;
pub mod linalg;
pub mod parse;
pub mod poly;

use thiserror::Error;

pub use coeff::{Coeff, RatFunc, Rational};
pub use decompose::{
    change_of_variables, independent_decomposition, linearize, r_independent, BasisKind,
    CoefficientMatrix, Independence,
};
pub use family::{
    equivalence_classes, equivalent, is_nice, is_standard, weight_less, weight_vector,
    PolyFamily, WeightVector,
};
pub use parse::{parse_poly, parse_polys, parse_real_polys, ParseError};
pub use poly::{MultiPoly, Poly, RealPoly};

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum PolyError {
    #[error(transparent)]
    Parse(#[from] ParseError),
    #[error("empty family")]
    EmptyFamily,
    #[error("variable count mismatch: expected {expected}, found {found}")]
    MismatchedVars { expected: usize, found: usize },
    #[error("member {0} is constant")]
    ConstantMember(usize),
    #[error("every member is constant")]
    Degenerate,
    #[error("member {0} is not linear")]
    NotLinear(usize),
    #[error("substitution matrix is singular")]
    Singular,
    #[error("dimension mismatch: expected {expected}, found {found}")]
    DimensionMismatch { expected: usize, found: usize },
    #[error("family is not nice (a member or a pairwise difference is constant)")]
    NotNice,
}
