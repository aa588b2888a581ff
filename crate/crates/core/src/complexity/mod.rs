//! Upper bounds on the flow average complexity of polynomial families.
//!
//! A nice family is first linearized over an R-independent basis. For each
//! target index `j` the search looks for a column `gamma` such that, after
//! the substitution `u = B v` with `gamma` as the first column of `B`, the
//! coefficients of `v_1` satisfy `alpha_{j,1} != 0` and
//! `alpha_{j,1} != alpha_{i,1}` for `i != j`. The `p_j`-complexity is then at
//! most `|Lambda_1| - 1`, where `Lambda_1` is the set of distinct nonzero
//! coefficients of `v_1`. R-independent families have complexity exactly 0,
//! and `k - 1` is always an upper bound.
//!
//! Indices are 0-based in the Rust API and 1-based in serialized output.

mod replay;
mod search;

use serde::{Serialize, Serializer};

use crate::exec::Execution;
use crate::polyfam::linalg::Matrix;
use crate::polyfam::{
    is_nice, r_independent, BasisKind, Coeff, PolyError, PolyFamily, WeightVector,
};

pub use replay::{replay_certificate, ReplayError};
pub use search::{family_complexity_bounds, pj_bound_search};

/// Default number of grid candidates examined per search.
pub const DEFAULT_BUDGET: usize = 10_000;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct SearchOptions {
    /// Maximum number of grid candidates for `gamma`.
    pub budget: usize,
    /// Run the exact equality-pattern stage after the grid.
    pub refine: bool,
    pub execution: Execution,
}

impl Default for SearchOptions {
    fn default() -> Self {
        SearchOptions {
            budget: DEFAULT_BUDGET,
            refine: true,
            execution: Execution::default(),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum Rule {
    /// `|Lambda_1| - 1` after a substitution.
    #[serde(rename = "prop59")]
    DistinctValues,
    /// The generic cap `k - 1`.
    #[serde(rename = "cor56")]
    GenericCap,
    /// R-independent family, complexity exactly 0.
    #[serde(rename = "cor58")]
    Independent,
}

/// Where the certifying `gamma` came from.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Source {
    Grid,
    Refinement,
    Independent,
    Fallback,
}

/// One linear substitution `u = B v`; `gamma` is the first column of `B`.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct Substitution {
    pub gamma: Vec<Coeff>,
    #[serde(rename = "B")]
    pub b: Matrix<Coeff>,
    pub det: Coeff,
}

fn one_based<S: Serializer>(j: &usize, s: S) -> Result<S::Ok, S::Error> {
    s.serialize_u64(*j as u64 + 1)
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct ComplexityCertificate {
    #[serde(serialize_with = "one_based")]
    pub j: usize,
    pub bound: usize,
    pub rule: Rule,
    pub substitutions: Vec<Substitution>,
    /// The analyzed family as given.
    pub family: String,
    /// Its linearization, where the substitution chain starts.
    pub linearization: String,
    /// `p_j` in the linearization.
    pub target: String,
    pub resulting_family: String,
    /// Best `|Lambda_1|` over the original variables where the hypotheses
    /// already hold, if any.
    pub lambda1_before: Option<usize>,
    pub lambda1_after: Option<usize>,
    pub source: Source,
    /// True when no valid substitution was found and the generic cap was
    /// used instead.
    pub fallback: bool,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct FamilyComplexityReport {
    pub family: PolyFamily,
    pub linearization: PolyFamily,
    pub basis: PolyFamily,
    pub basis_kind: BasisKind,
    pub coefficient_matrix: Matrix<Coeff>,
    pub independent: bool,
    pub dependence_witness: Option<Vec<Coeff>>,
    pub weight_vector: WeightVector,
    /// 1-based indices of members with `p_i(0) != 0`.
    pub nonzero_constant_terms: Vec<usize>,
    pub per_j: Vec<ComplexityCertificate>,
    pub family_bound: usize,
    /// True only for bound 0; nonzero bounds are upper bounds.
    pub exact: bool,
    pub candidates_examined: usize,
    pub budget: usize,
}

/// Complexity 0 holds exactly when the family is R-independent.
pub fn complexity_zero(fam: &PolyFamily) -> Result<bool, PolyError> {
    if !is_nice(fam) {
        return Err(PolyError::NotNice);
    }
    Ok(r_independent(fam).independent)
}

/// Number of distinct nonzero values.
pub fn lambda1(values: &[Coeff]) -> usize {
    let mut v: Vec<&Coeff> = values.iter().filter(|c| !c.is_zero()).collect();
    v.sort();
    v.dedup();
    v.len()
}

/// `|Lambda_1| - 1` when `values[j]` is nonzero and differs from every other
/// entry, otherwise `None`.
pub fn distinct_value_bound(values: &[Coeff], j: usize) -> Option<usize> {
    let vj = &values[j];
    if vj.is_zero() {
        return None;
    }
    if values.iter().enumerate().any(|(i, v)| i != j && v == vj) {
        return None;
    }
    Some(lambda1(values) - 1)
}

/// The bound read directly off variable `col` of a linear family.
pub fn pj_bound_direct(
    fam: &PolyFamily,
    j: usize,
    col: usize,
) -> Result<Option<usize>, PolyError> {
    let a = crate::polyfam::decompose::linear_matrix(fam)?;
    if col >= fam.nvars() {
        return Err(PolyError::DimensionMismatch {
            expected: fam.nvars(),
            found: col + 1,
        });
    }
    let column: Vec<Coeff> = a.iter().map(|r| r[col].clone()).collect();
    Ok(distinct_value_bound(&column, j))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn fam(s: &str) -> PolyFamily {
        PolyFamily::parse(s, None).unwrap()
    }

    #[test]
    fn direct_bounds() {
        // columns: s then t
        let f = fam("s+t, s-t, 2s");
        assert_eq!(pj_bound_direct(&f, 0, 1).unwrap(), Some(1));
        assert_eq!(pj_bound_direct(&f, 2, 0).unwrap(), Some(1));
        assert_eq!(pj_bound_direct(&f, 0, 0).unwrap(), None);
        let f = fam("u1, 2u1, u2");
        assert_eq!(pj_bound_direct(&f, 2, 1).unwrap(), Some(0));
        let f = fam("s, t, w-s, t+w");
        assert_eq!(pj_bound_direct(&f, 0, 0).unwrap(), Some(1));
    }

    #[test]
    fn zero_complexity() {
        assert!(complexity_zero(&fam("t, t^2")).unwrap());
        assert!(!complexity_zero(&fam("u1, 2u1, u2")).unwrap());
        // three members in the span of {t, t^2}
        assert!(!complexity_zero(&fam("t, t^2, 3t^2+pi*t")).unwrap());
        assert!(complexity_zero(&fam("t, t+1")).is_err());
    }
}
