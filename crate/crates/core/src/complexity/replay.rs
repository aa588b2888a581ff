use thiserror::Error;

use crate::polyfam::decompose::linear_matrix;
use crate::polyfam::{
    change_of_variables, is_nice, linalg, linearize, r_independent, Coeff, PolyError, PolyFamily,
};

use super::{lambda1, distinct_value_bound, ComplexityCertificate, Rule};

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum ReplayError {
    #[error("index mismatch: the family has the same members in a different order")]
    IndexMismatch,
    #[error("certificate was issued for {expected}, not {found}")]
    FamilyMismatch { expected: String, found: String },
    #[error("linearization differs: expected {expected}, found {found}")]
    LinearizationMismatch { expected: String, found: String },
    #[error("target index {0} is out of range")]
    BadIndex(usize),
    #[error("target member differs: expected {expected}, found {found}")]
    TargetMismatch { expected: String, found: String },
    #[error("step {step}: recorded determinant {recorded} but computed {computed}")]
    DetMismatch {
        step: usize,
        recorded: String,
        computed: String,
    },
    #[error("step {step}: gamma is not the first column of B")]
    GammaMismatch { step: usize },
    #[error("step {step}: {source}")]
    Substitution { step: usize, source: PolyError },
    #[error("resulting family differs: expected {expected}, found {found}")]
    ResultMismatch { expected: String, found: String },
    #[error("gamma violates the hypotheses for the target member")]
    InvalidGamma,
    #[error("claimed bound {claimed} but the substitution gives {derived}")]
    BoundMismatch { claimed: usize, derived: usize },
    #[error("recorded |Lambda_1| {recorded:?} but computed {computed}")]
    LambdaMismatch {
        recorded: Option<usize>,
        computed: usize,
    },
    #[error("rule cor58 requires an R-independent family")]
    NotIndependent,
    #[error("rule cor56 requires a nice family and bound k - 1")]
    CapMismatch,
    #[error(transparent)]
    Poly(#[from] PolyError),
}

/// Re-derives everything recorded in `cert` from `fam`.
pub fn replay_certificate(cert: &ComplexityCertificate, fam: &PolyFamily) -> Result<(), ReplayError> {
    let found = fam.to_string();
    if found != cert.family {
        let mut a: Vec<String> = fam.polys().iter().map(|p| p.to_string()).collect();
        let mut b: Vec<String> = cert.family.split(", ").map(str::to_string).collect();
        a.sort();
        b.sort();
        return Err(if a == b {
            ReplayError::IndexMismatch
        } else {
            ReplayError::FamilyMismatch {
                expected: cert.family.clone(),
                found,
            }
        });
    }
    let lin = linearize(fam)?;
    if lin.to_string() != cert.linearization {
        return Err(ReplayError::LinearizationMismatch {
            expected: cert.linearization.clone(),
            found: lin.to_string(),
        });
    }
    let k = fam.len();
    if cert.j >= k {
        return Err(ReplayError::BadIndex(cert.j));
    }
    let target = lin.get(cert.j).to_string();
    if target != cert.target {
        return Err(ReplayError::TargetMismatch {
            expected: cert.target.clone(),
            found: target,
        });
    }

    match cert.rule {
        Rule::Independent => {
            if !r_independent(fam).independent || cert.bound != 0 {
                return Err(ReplayError::NotIndependent);
            }
            Ok(())
        }
        Rule::GenericCap => {
            if !is_nice(fam) || cert.bound != k - 1 {
                return Err(ReplayError::CapMismatch);
            }
            Ok(())
        }
        Rule::DistinctValues => {
            let mut cur: PolyFamily = lin;
            for (step, sub) in cert.substitutions.iter().enumerate() {
                let computed = linalg::det(&sub.b);
                if computed != sub.det {
                    return Err(ReplayError::DetMismatch {
                        step,
                        recorded: sub.det.to_string(),
                        computed: computed.to_string(),
                    });
                }
                let col: Vec<Coeff> = sub.b.iter().map(|r| r[0].clone()).collect();
                if col != sub.gamma {
                    return Err(ReplayError::GammaMismatch { step });
                }
                cur = change_of_variables(&cur, &sub.b)
                    .map_err(|source| ReplayError::Substitution { step, source })?;
            }
            if cur.to_string() != cert.resulting_family {
                return Err(ReplayError::ResultMismatch {
                    expected: cert.resulting_family.clone(),
                    found: cur.to_string(),
                });
            }
            let col: Vec<Coeff> = linear_matrix(&cur)?.iter().map(|r| r[0].clone()).collect();
            let derived = distinct_value_bound(&col, cert.j).ok_or(ReplayError::InvalidGamma)?;
            if derived != cert.bound {
                return Err(ReplayError::BoundMismatch {
                    claimed: cert.bound,
                    derived,
                });
            }
            let l1 = lambda1(&col);
            if cert.lambda1_after != Some(l1) {
                return Err(ReplayError::LambdaMismatch {
                    recorded: cert.lambda1_after,
                    computed: l1,
                });
            }
            Ok(())
        }
    }
}
