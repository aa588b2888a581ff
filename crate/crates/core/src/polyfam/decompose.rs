//! R-independence, the independent decomposition `p_j = sum_i alpha_{j,i} q_i`
//! and linear changes of variables.

use std::collections::BTreeSet;

use serde::Serialize;

use super::coeff::{Coeff, RatFunc};
use super::family::PolyFamily;
use super::linalg::{self, Matrix};
use super::poly::{Exponent, MultiPoly, Poly};
use super::PolyError;

/// Result of the R-independence test.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Independence {
    pub independent: bool,
    pub rank: usize,
    /// Coefficients `c` with `sum_j c_j p_j` constant, when dependent.
    pub witness: Option<Vec<Coeff>>,
}

/// Non-constant monomials of the family, in a fixed order.
fn monomials(fam: &PolyFamily) -> Vec<Exponent> {
    let set: BTreeSet<Exponent> = fam
        .polys()
        .iter()
        .flat_map(|p| p.terms().map(|(e, _)| e.clone()))
        .filter(|e| e.iter().any(|&x| x > 0))
        .collect();
    set.into_iter().collect()
}

fn coeff_rows(fam: &PolyFamily, monos: &[Exponent]) -> Matrix<Coeff> {
    fam.polys()
        .iter()
        .map(|p| {
            monos
                .iter()
                .map(|e| p.coeff(e).cloned().unwrap_or_default())
                .collect()
        })
        .collect()
}

/// Members are R-independent iff the stacked coefficient vectors of their
/// non-constant parts have full row rank over Q(tau).
pub fn r_independent(fam: &PolyFamily) -> Independence {
    let monos = monomials(fam);
    let rows = coeff_rows(fam, &monos);
    let k = fam.len();
    let rank = linalg::rank(&rows);
    if rank == k {
        return Independence {
            independent: true,
            rank,
            witness: None,
        };
    }
    let t = linalg::to_ratfunc(&linalg::transpose(&rows));
    let kernel = if monos.is_empty() {
        // Every member is constant.
        let mut v = vec![RatFunc::zero(); k];
        v[0] = RatFunc::one();
        vec![v]
    } else {
        linalg::nullspace(&t, k)
    };
    Independence {
        independent: false,
        rank,
        witness: kernel.first().map(|v| linalg::clear_denominators(v)),
    }
}

/// How the basis `q_1, ..., q_l` was chosen.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum BasisKind {
    /// A maximal independent subfamily of members, chosen first-come.
    Members,
    /// The distinct non-constant monomials; used when expressing the family
    /// over a member basis would need coefficients outside Q[tau, 1/tau].
    Monomials,
}

/// `p_j - p_j(0) = sum_i alpha[j][i] * q_i` with `q` R-independent.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CoefficientMatrix {
    pub basis: PolyFamily,
    pub basis_kind: BasisKind,
    /// For a member basis, the member index behind each `q_i`.
    pub basis_members: Vec<usize>,
    pub alpha: Matrix<Coeff>,
    pub constants: Vec<Coeff>,
}

impl CoefficientMatrix {
    pub fn rows(&self) -> usize {
        self.alpha.len()
    }

    pub fn cols(&self) -> usize {
        self.basis.len()
    }

    pub fn entry(&self, j: usize, i: usize) -> &Coeff {
        &self.alpha[j][i]
    }

    /// `{sum_i alpha_{j,i} u_i}` in `l` fresh variables.
    pub fn linear_family(&self) -> PolyFamily {
        PolyFamily::new(self.alpha.iter().map(|r| Poly::linear(r)).collect())
            .expect("nonempty family")
    }

    /// `sum_i alpha_{j,i} q_i` (constant term not included).
    pub fn reconstruct(&self, j: usize) -> MultiPoly {
        let mut acc = Poly::zero(self.basis.nvars());
        for (i, a) in self.alpha[j].iter().enumerate() {
            if !a.is_zero() {
                acc = acc.add(&self.basis.get(i).scale(a));
            }
        }
        acc
    }
}

pub fn independent_decomposition(fam: &PolyFamily) -> Result<CoefficientMatrix, PolyError> {
    let monos = monomials(fam);
    if monos.is_empty() {
        return Err(PolyError::Degenerate);
    }
    let rows = coeff_rows(fam, &monos);
    let constants: Vec<Coeff> = fam.polys().iter().map(|p| p.constant_term()).collect();

    let mut chosen: Vec<usize> = Vec::new();
    for j in 0..fam.len() {
        let mut trial: Matrix<Coeff> = chosen.iter().map(|&i| rows[i].clone()).collect();
        trial.push(rows[j].clone());
        if linalg::rank(&trial) == trial.len() {
            chosen.push(j);
        }
    }

    // Solve Q^T alpha_j = row_j for each member.
    let qt = linalg::to_ratfunc(&linalg::transpose(
        &chosen.iter().map(|&i| rows[i].clone()).collect::<Vec<_>>(),
    ));
    let mut alpha = Vec::with_capacity(fam.len());
    let mut laurent = true;
    'members: for (j, row) in rows.iter().enumerate() {
        if let Some(pos) = chosen.iter().position(|&c| c == j) {
            let mut r = vec![Coeff::zero(); chosen.len()];
            r[pos] = Coeff::one();
            alpha.push(r);
            continue;
        }
        let b: Vec<RatFunc> = row.iter().map(RatFunc::from).collect();
        let x = linalg::solve(&qt, &b).expect("member lies in the span of the basis");
        let mut r = Vec::with_capacity(x.len());
        for v in &x {
            match v.to_coeff() {
                Some(c) => r.push(c),
                None => {
                    laurent = false;
                    break 'members;
                }
            }
        }
        alpha.push(r);
    }

    if laurent {
        let basis = PolyFamily::new(
            chosen
                .iter()
                .map(|&i| fam.get(i).without_constant())
                .collect(),
        )?;
        return Ok(CoefficientMatrix {
            basis,
            basis_kind: BasisKind::Members,
            basis_members: chosen,
            alpha,
            constants,
        });
    }

    let d = fam.nvars();
    let basis = PolyFamily::new(
        monos
            .iter()
            .map(|e| Poly::from_terms(d, [(e.clone(), Coeff::one())]))
            .collect(),
    )?;
    Ok(CoefficientMatrix {
        basis,
        basis_kind: BasisKind::Monomials,
        basis_members: Vec::new(),
        alpha: rows,
        constants,
    })
}

/// The linear family sharing all complexity bounds and limits with `fam`.
pub fn linearize(fam: &PolyFamily) -> Result<PolyFamily, PolyError> {
    Ok(independent_decomposition(fam)?.linear_family())
}

/// `k x d` matrix of degree-one coefficients of an affine family.
pub fn linear_matrix(fam: &PolyFamily) -> Result<Matrix<Coeff>, PolyError> {
    if let Some(i) = fam.polys().iter().position(|p| !p.is_affine()) {
        return Err(PolyError::NotLinear(i));
    }
    Ok(fam.polys().iter().map(|p| p.linear_coeffs()).collect())
}

/// Substitutes `u_i = sum_m b[i][m] v_m`, giving the family with coefficient
/// matrix `A * B`. Constant terms are kept.
pub fn change_of_variables(fam: &PolyFamily, b: &[Vec<Coeff>]) -> Result<PolyFamily, PolyError> {
    let a = linear_matrix(fam)?;
    let l = fam.nvars();
    if b.len() != l || b.iter().any(|r| r.len() != l) {
        return Err(PolyError::DimensionMismatch {
            expected: l,
            found: b.len(),
        });
    }
    if linalg::det(b).is_zero() {
        return Err(PolyError::Singular);
    }
    let c = linalg::mat_mul(&a, b);
    let polys = c
        .iter()
        .zip(fam.polys())
        .map(|(row, p)| Poly::linear(row).add(&Poly::constant(l, p.constant_term())))
        .collect();
    PolyFamily::new(polys)
}
