//! Finite-R checks of the seminorm bound for linear families and of the
//! van der Corput inequality, for trigonometric polynomials on tori.

use std::collections::HashMap;

use num_complex::Complex64;
use serde::Serialize;

use super::average::RealFamily;
use super::flow::TorusFlow;
use super::observable::{e, TrigPoly};
use super::sampling::SamplingPlan;
use super::seminorm::{hk_seminorm_with, SeminormMethod};
use super::FlowError;
use crate::polyfam::decompose::linear_matrix;
use crate::polyfam::{is_nice, Coeff, PolyError, PolyFamily};

const MAX_COMBINATIONS: usize = 1 << 18;

/// Default slack for finite-R comparisons.
pub const DEFAULT_SLACK: f64 = 0.05;

/// One term of the expansion of `prod_j f_j(x + p_j(s) gamma)`: it
/// contributes `coeff * e(sum_j weights[j] p_j(s))` to output frequency
/// `target`.
struct Combo {
    target: usize,
    coeff: Complex64,
    freqs: Vec<usize>,
    weights: Vec<f64>,
}

struct Expansion {
    targets: Vec<Vec<i64>>,
    combos: Vec<Combo>,
}

fn expand(fs: &[TrigPoly], gamma: &[f64]) -> Result<Expansion, FlowError> {
    let count = fs
        .iter()
        .try_fold(1usize, |acc, f| acc.checked_mul(f.terms().len()))
        .filter(|&c| c <= MAX_COMBINATIONS)
        .ok_or_else(|| FlowError::InvalidObservable("too many frequency combinations".into()))?;
    let k = fs.len();
    let m = gamma.len();
    let mut index: HashMap<Vec<i64>, usize> = HashMap::new();
    let mut targets = Vec::new();
    let mut combos = Vec::with_capacity(count);
    if count == 0 {
        return Ok(Expansion { targets, combos });
    }
    let mut idx = vec![0usize; k];
    loop {
        let mut total = vec![0i64; m];
        let mut coeff = Complex64::new(1.0, 0.0);
        let mut weights = Vec::with_capacity(k);
        for (f, &i) in fs.iter().zip(&idx) {
            let t = &f.terms()[i];
            for (a, b) in total.iter_mut().zip(&t.freq) {
                *a += b;
            }
            coeff *= t.amp;
            weights.push(t.freq.iter().zip(gamma).map(|(&n, g)| n as f64 * g).sum());
        }
        let next = targets.len();
        let target = *index.entry(total.clone()).or_insert_with(|| {
            targets.push(total);
            next
        });
        combos.push(Combo {
            target,
            coeff,
            freqs: idx.clone(),
            weights,
        });
        let mut j = 0;
        loop {
            if j == k {
                return Ok(Expansion { targets, combos });
            }
            idx[j] += 1;
            if idx[j] < fs[j].terms().len() {
                break;
            }
            idx[j] = 0;
            j += 1;
        }
    }
}

fn check_trig(fs: &[TrigPoly], m: usize) -> Result<(), FlowError> {
    for f in fs {
        if f.m() != m {
            return Err(FlowError::DimensionMismatch {
                what: "observable dimension",
                expected: m,
                found: f.m(),
            });
        }
    }
    Ok(())
}

/// `(e(b R) - 1) / (2 pi i b R)`, the mean of `e(b s)` over `[0, R]`.
fn window_mean(b: f64, r: f64) -> Complex64 {
    let t = b * r;
    if t.abs() < 1e-12 {
        return Complex64::new(1.0, 0.0);
    }
    (e(t) - 1.0) / Complex64::new(0.0, std::f64::consts::TAU * t)
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SeminormBoundReport {
    pub k: usize,
    /// `||avg_s prod_j T_{p_j(s)} f_j||_{L^2}` at the plan's `R`.
    pub average_norm: f64,
    /// The same norm for the limit `R -> infinity`.
    pub limit_norm: f64,
    pub seminorms: Vec<f64>,
    pub min_seminorm: f64,
    pub slack: f64,
    /// `min_seminorm + slack - average_norm`.
    pub margin: f64,
    pub pass: bool,
    /// False when some `f_l` has coefficient sum above 1, so the sup norm
    /// bound in the hypothesis is not certified.
    pub sup_bound_certified: bool,
    #[serde(rename = "R")]
    pub r: Vec<f64>,
}

/// Compares the L^2 norm of the finite-R average along a nice linear family
/// with `p_i(0) = 0` against `min_l ||f_l||_k` on an ergodic rotation of
/// `T^1`. Both sides are computed in closed form from Fourier
/// coefficients; the plan supplies `R` and the execution mode.
pub fn seminorm_bound_check(
    flow: &TorusFlow,
    fam: &PolyFamily,
    fs: &[TrigPoly],
    plan: &SamplingPlan,
    k: usize,
    slack: f64,
) -> Result<SeminormBoundReport, FlowError> {
    if flow.m() != 1 {
        return Err(FlowError::DimensionMismatch {
            what: "torus dimension",
            expected: 1,
            found: flow.m(),
        });
    }
    check_trig(fs, 1)?;
    if fs.len() != fam.len() {
        return Err(FlowError::DimensionMismatch {
            what: "observables",
            expected: fam.len(),
            found: fs.len(),
        });
    }
    if !is_nice(fam) {
        return Err(PolyError::NotNice.into());
    }
    if let Some(&i) = fam.nonzero_constants().first() {
        return Err(PolyError::ConstantMember(i).into());
    }
    let a = linear_matrix(fam)?;
    plan.validate()?;
    if plan.d() != fam.nvars() {
        return Err(FlowError::DimensionMismatch {
            what: "plan dimension",
            expected: fam.nvars(),
            found: plan.d(),
        });
    }
    let gamma = flow.gamma[0];
    let seminorms = fs
        .iter()
        .map(|f| hk_seminorm_with(f, gamma, k, SeminormMethod::ClosedForm, plan.execution).map(|v| v.value))
        .collect::<Result<Vec<f64>, _>>()?;
    let min_seminorm = seminorms.iter().copied().fold(f64::INFINITY, f64::min);

    let ex = expand(fs, &[gamma])?;
    let d = fam.nvars();
    let mut finite = vec![Complex64::default(); ex.targets.len()];
    let mut limit = vec![Complex64::default(); ex.targets.len()];
    for c in &ex.combos {
        let mut w = Complex64::new(1.0, 0.0);
        let mut resonant = true;
        for i in 0..d {
            // Exact test of sum_j n_j a_{j,i} = 0.
            let mut exact = Coeff::zero();
            for (j, &t) in c.freqs.iter().enumerate() {
                let n = fs[j].terms()[t].freq[0];
                if n != 0 && !a[j][i].is_zero() {
                    exact = &exact + &(&a[j][i] * &Coeff::from_int(n));
                }
            }
            if !exact.is_zero() {
                resonant = false;
                w *= window_mean(gamma * exact.to_f64(), plan.r[i]);
            }
        }
        finite[c.target] += c.coeff * w;
        if resonant {
            limit[c.target] += c.coeff;
        }
    }
    let norm = |v: &[Complex64]| v.iter().map(|c| c.norm_sqr()).sum::<f64>().sqrt();
    let average_norm = norm(&finite);
    let margin = min_seminorm + slack - average_norm;
    Ok(SeminormBoundReport {
        k,
        average_norm,
        limit_norm: norm(&limit),
        seminorms,
        min_seminorm,
        slack,
        margin,
        pass: margin >= 0.0,
        sup_bound_certified: fs.iter().all(|f| f.l1() <= 1.0 + 1e-12),
        r: plan.r.clone(),
    })
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct VdcReport {
    /// `||avg_s g_s||^2`.
    pub lhs: f64,
    /// `(1/|Psi|^2) int_Psi int_Psi avg_s <g_{s+u}, g_{s+v}> du dv`.
    pub rhs: f64,
    /// `rhs - lhs`.
    pub margin: f64,
    pub slack: f64,
    pub pass: bool,
    pub samples: usize,
    pub sup_bound_certified: bool,
}

/// Both sides of the van der Corput inequality for
/// `g_s(x) = prod_j f_j(x + p_j(s) gamma)` on `T^m`. Inner products over `x`
/// are exact; the `s`, `u`, `v` integrals are sampled with `plan`, the
/// right-hand side over the product of `[0,R]` with two copies of `psi`.
pub fn vdc_check(
    flow: &TorusFlow,
    fam: &RealFamily,
    fs: &[TrigPoly],
    psi: &[(f64, f64)],
    plan: &SamplingPlan,
    slack: f64,
) -> Result<VdcReport, FlowError> {
    check_trig(fs, flow.m())?;
    if fs.len() != fam.len() {
        return Err(FlowError::DimensionMismatch {
            what: "observables",
            expected: fam.len(),
            found: fs.len(),
        });
    }
    let d = fam.nvars();
    plan.validate()?;
    if plan.d() != d || psi.len() != d {
        return Err(FlowError::DimensionMismatch {
            what: "parameter dimension",
            expected: d,
            found: if plan.d() != d { plan.d() } else { psi.len() },
        });
    }
    if psi.iter().any(|&(lo, hi)| !(lo.is_finite() && hi.is_finite() && hi > lo)) {
        return Err(FlowError::InvalidPlan("Psi must be a nondegenerate box".into()));
    }
    let ex = expand(fs, &flow.gamma)?;
    let nt = ex.targets.len();
    let coeffs = |s: &[f64], out: &mut [Complex64], vals: &mut [f64]| {
        for (v, p) in vals.iter_mut().zip(fam.polys()) {
            *v = p.eval_f64(s);
        }
        out.iter_mut().for_each(|c| *c = Complex64::default());
        for c in &ex.combos {
            let phase: f64 = c.weights.iter().zip(vals.iter()).map(|(w, p)| w * p).sum();
            out[c.target] += c.coeff * e(phase);
        }
    };
    let k = fam.len();

    let sums = plan.fold(
        || (vec![Complex64::default(); nt], vec![Complex64::default(); nt], vec![0.0; k]),
        |(acc, buf, vals), s| {
            coeffs(s, buf, vals);
            for (a, b) in acc.iter_mut().zip(buf.iter()) {
                *a += b;
            }
        },
    );
    let mut mean = vec![Complex64::default(); nt];
    for (acc, _, _) in &sums {
        for (m, a) in mean.iter_mut().zip(acc) {
            *m += a;
        }
    }
    let n = plan.count() as f64;
    let lhs: f64 = mean.iter().map(|c| (c / n).norm_sqr()).sum();

    let mut ext = plan.clone();
    ext.r = plan.r.clone();
    ext.r.extend(psi.iter().map(|&(lo, hi)| hi - lo));
    ext.r.extend(psi.iter().map(|&(lo, hi)| hi - lo));
    ext.per_axis = plan.per_axis.as_ref().map(|p| {
        let mut q = p.clone();
        q.extend(std::iter::repeat_n(8, 2 * d));
        q
    });
    let parts = ext.fold(
        || {
            (
                0.0f64,
                vec![Complex64::default(); nt],
                vec![Complex64::default(); nt],
                vec![0.0; d],
                vec![0.0; k],
            )
        },
        |(acc, a, b, pt, vals), w| {
            for i in 0..d {
                pt[i] = w[i] + psi[i].0 + w[d + i];
            }
            coeffs(pt, a, vals);
            for i in 0..d {
                pt[i] = w[i] + psi[i].0 + w[2 * d + i];
            }
            coeffs(pt, b, vals);
            *acc += a.iter().zip(b.iter()).map(|(x, y)| (x * y.conj()).re).sum::<f64>();
        },
    );
    let rhs = parts.iter().map(|p| p.0).sum::<f64>() / ext.count() as f64;
    let margin = rhs - lhs;
    Ok(VdcReport {
        lhs,
        rhs,
        margin,
        slack,
        pass: lhs <= rhs + slack,
        samples: ext.count(),
        sup_bound_certified: fs.iter().map(TrigPoly::l1).product::<f64>() <= 1.0 + 1e-12,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::flows::sampling::Scheme;

    fn c(re: f64) -> Complex64 {
        Complex64::new(re, 0.0)
    }

    fn rot() -> TorusFlow {
        TorusFlow::new(vec![2f64.sqrt()])
    }

    #[test]
    fn single_character_average_vanishes() {
        let fam = PolyFamily::parse("s", None).unwrap();
        let plan = SamplingPlan::monte_carlo(vec![2000.0], 1, 0);
        let r = seminorm_bound_check(&rot(), &fam, &[TrigPoly::character(vec![1])], &plan, 1, DEFAULT_SLACK).unwrap();
        assert_eq!(r.min_seminorm, 0.0);
        assert!(r.average_norm <= 0.05);
        assert_eq!(r.limit_norm, 0.0);
        assert!(r.pass);
    }

    #[test]
    fn constant_functions_give_equality() {
        let fam = PolyFamily::parse("s, 2s", None).unwrap();
        let one = TrigPoly::constant(1, c(1.0));
        let plan = SamplingPlan::monte_carlo(vec![2000.0], 1, 0);
        let r = seminorm_bound_check(&rot(), &fam, &[one.clone(), one], &plan, 2, DEFAULT_SLACK).unwrap();
        assert!((r.average_norm - 1.0).abs() < 1e-12);
        assert!((r.min_seminorm - 1.0).abs() < 1e-12);
        assert!(r.pass);
    }

    #[test]
    fn rejects_non_linear_or_shifted_families() {
        let plan = SamplingPlan::monte_carlo(vec![10.0], 1, 0);
        let f = [TrigPoly::character(vec![1])];
        assert!(seminorm_bound_check(&rot(), &PolyFamily::parse("s^2", None).unwrap(), &f, &plan, 1, 0.05).is_err());
        assert!(seminorm_bound_check(&rot(), &PolyFamily::parse("s+1", None).unwrap(), &f, &plan, 1, 0.05).is_err());
    }

    #[test]
    fn vdc_constant_family_is_tight() {
        let fam = RealFamily::parse("0", Some(1)).unwrap();
        let f = TrigPoly::new(1, [(vec![1], c(0.6)), (vec![0], c(0.3))]).unwrap();
        let plan = SamplingPlan::new(vec![100.0], Scheme::MonteCarlo, 2000, 0);
        let r = vdc_check(&rot(), &fam, &[f], &[(0.0, 5.0)], &plan, DEFAULT_SLACK).unwrap();
        assert!((r.lhs - 0.45).abs() < 1e-12);
        assert!((r.rhs - 0.45).abs() < 1e-12);
        assert!(r.pass);
    }

    #[test]
    fn vdc_ergodic_translates() {
        let fam = RealFamily::parse("s", None).unwrap();
        let f = TrigPoly::character(vec![1]);
        let plan = SamplingPlan::monte_carlo(vec![2000.0], 100_000, 1);
        let r = vdc_check(&rot(), &fam, &[f], &[(0.0, 5.0)], &plan, DEFAULT_SLACK).unwrap();
        assert!(r.lhs < 1e-3);
        assert!(r.rhs.abs() < 0.02);
        assert!(r.pass);
    }
}
