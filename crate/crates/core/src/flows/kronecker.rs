//! The limit `int prod_j f_j(x + sum_i alpha_{j,i} u_i) du` of averages along
//! a linearized family on an ergodic torus rotation.
//!
//! Each `u_i` ranges over `T^m`, so the integral runs over `m * l` real
//! variables `u_{i,v}`. For rational `alpha` the integrand is periodic and
//! the midpoint rule over one period box is used; otherwise the mean over a
//! long window is estimated by Monte Carlo. In direction mode the variables
//! are instead `u_i` in `R` moving along a fixed flow direction `gamma`,
//! which covers non-ergodic rotations.

use num_complex::Complex64;
use num_integer::Integer;
use num_traits::{One, Zero};
use serde::Serialize;

use super::flow::{frac, looks_rational};
use super::observable::{e, Observable};
use super::sampling::{SamplingPlan, Scheme};
use super::FlowError;
use crate::exec::Execution;
use crate::polyfam::coeff::Rational;
use crate::polyfam::parse::snap_f64;
use crate::polyfam::Coeff;

/// Largest period box side handled by the grid rule.
const MAX_PERIOD: u64 = 1 << 20;
/// Largest grid handled before switching to Monte Carlo over the period box.
const MAX_GRID_POINTS: usize = 1 << 24;
/// Largest number of frequency combinations enumerated by the closed form.
const MAX_COMBINATIONS: usize = 1 << 20;

#[derive(Debug, Clone, PartialEq)]
pub struct KroneckerOptions {
    /// Grid points per variable and per period.
    pub resolution: usize,
    /// Flow direction; `None` integrates each `u_i` over `T^m`.
    pub direction: Option<Vec<f64>>,
    /// Window length and sample count for the Monte Carlo fallback.
    pub window: f64,
    pub samples: usize,
    pub seed: u64,
    pub execution: Execution,
}

impl Default for KroneckerOptions {
    fn default() -> Self {
        KroneckerOptions {
            resolution: 64,
            direction: None,
            window: 1000.0,
            samples: 200_000,
            seed: 0,
            execution: Execution::default(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
#[serde(tag = "kind", rename_all = "kebab-case")]
pub enum Quadrature {
    PeriodGrid { periods: Vec<u64>, resolution: usize },
    PeriodMonteCarlo { periods: Vec<u64>, samples: usize },
    WindowMonteCarlo { window: f64, samples: usize },
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct KroneckerLimit {
    pub quadrature: Complex64,
    /// Exact frequency-matching value, for trigonometric polynomial inputs.
    pub closed_form: Option<Complex64>,
    pub method: Quadrature,
    pub points: usize,
}

impl KroneckerLimit {
    /// The closed form when available, else the quadrature value.
    pub fn value(&self) -> Complex64 {
        self.closed_form.unwrap_or(self.quadrature)
    }
}

/// `arg_{j,v} = x_v + sum_r w[j][v][r] * var_r`.
struct Layout {
    vars: usize,
    weights: Vec<Vec<Vec<f64>>>,
    /// Exact rational weights when every weight is rational.
    exact: Option<Vec<Vec<Vec<Rational>>>>,
}

fn layout(alpha: &[Vec<Coeff>], m: usize, direction: Option<&[f64]>) -> Layout {
    let k = alpha.len();
    let l = alpha.first().map_or(0, Vec::len);
    match direction {
        None => {
            let vars = l * m;
            let mut weights = vec![vec![vec![0.0; vars]; m]; k];
            let mut exact = alpha.iter().all(|r| r.iter().all(Coeff::is_rational)).then(|| {
                vec![vec![vec![Rational::zero(); vars]; m]; k]
            });
            for j in 0..k {
                for v in 0..m {
                    for i in 0..l {
                        weights[j][v][i * m + v] = alpha[j][i].to_f64();
                        if let Some(ex) = exact.as_mut() {
                            ex[j][v][i * m + v] = alpha[j][i].as_rational().expect("rational");
                        }
                    }
                }
            }
            Layout { vars, weights, exact }
        }
        Some(gamma) => {
            let weights: Vec<Vec<Vec<f64>>> = alpha
                .iter()
                .map(|row| {
                    gamma
                        .iter()
                        .map(|g| row.iter().map(|a| a.to_f64() * g).collect())
                        .collect()
                })
                .collect();
            let all_rational = weights.iter().flatten().flatten().all(|&w| w == 0.0 || looks_rational(w));
            let exact = all_rational.then(|| {
                weights
                    .iter()
                    .map(|a| a.iter().map(|b| b.iter().map(|&w| snap_f64(w, 1_000_000)).collect()).collect())
                    .collect()
            });
            Layout { vars: l, weights, exact }
        }
    }
}

/// Smallest `q_r` with `q_r * w` integral for every weight on variable `r`.
fn periods(exact: &[Vec<Vec<Rational>>], vars: usize) -> Option<Vec<u64>> {
    let mut out = vec![num_bigint::BigInt::one(); vars];
    for a in exact {
        for b in a {
            for (r, w) in b.iter().enumerate() {
                out[r] = out[r].lcm(w.denom());
            }
        }
    }
    out.iter()
        .map(|q| u64::try_from(q).ok().filter(|&q| q <= MAX_PERIOD))
        .collect()
}

fn check(alpha: &[Vec<Coeff>], fs: &[Observable], x: &[f64], opts: &KroneckerOptions) -> Result<usize, FlowError> {
    if alpha.len() != fs.len() {
        return Err(FlowError::DimensionMismatch {
            what: "observables",
            expected: alpha.len(),
            found: fs.len(),
        });
    }
    let l = alpha.first().map_or(0, Vec::len);
    if l == 0 || alpha.iter().any(|r| r.len() != l) {
        return Err(FlowError::InvalidPlan("coefficient matrix must be rectangular and nonempty".into()));
    }
    let m = x.len();
    for f in fs {
        if f.dim() != m {
            return Err(FlowError::DimensionMismatch {
                what: "observable dimension",
                expected: m,
                found: f.dim(),
            });
        }
        f.validate()?;
    }
    if let Some(g) = &opts.direction {
        if g.len() != m {
            return Err(FlowError::DimensionMismatch {
                what: "direction",
                expected: m,
                found: g.len(),
            });
        }
    }
    if opts.resolution == 0 || opts.samples == 0 {
        return Err(FlowError::InvalidPlan("resolution and samples must be positive".into()));
    }
    Ok(m)
}

/// Frequency matching over all term combinations. Torus mode checks
/// `sum_j alpha_{j,i} n_{j,v} = 0` exactly; direction mode checks
/// `sum_j alpha_{j,i} (n_j . gamma) = 0` to 1e-9.
fn closed_form(alpha: &[Vec<Coeff>], fs: &[Observable], x: &[f64], direction: Option<&[f64]>) -> Option<Complex64> {
    let trig: Vec<_> = fs.iter().map(Observable::as_trig).collect::<Option<_>>()?;
    if trig.iter().any(|p| p.terms().is_empty()) {
        return Some(Complex64::default());
    }
    let combos = trig.iter().try_fold(1usize, |acc, p| acc.checked_mul(p.terms().len()))?;
    if combos > MAX_COMBINATIONS {
        return None;
    }
    let k = alpha.len();
    let l = alpha[0].len();
    let m = x.len();
    let mut idx = vec![0usize; k];
    let mut total = Complex64::default();
    loop {
        let matched = match direction {
            None => (0..l).all(|i| {
                (0..m).all(|v| {
                    let mut acc = Coeff::zero();
                    for j in 0..k {
                        let n = trig[j].terms()[idx[j]].freq[v];
                        if n != 0 && !alpha[j][i].is_zero() {
                            acc = &acc + &(&alpha[j][i] * &Coeff::from_int(n));
                        }
                    }
                    acc.is_zero()
                })
            }),
            Some(g) => (0..l).all(|i| {
                let s: f64 = (0..k)
                    .map(|j| {
                        let t = &trig[j].terms()[idx[j]];
                        let ng: f64 = t.freq.iter().zip(g).map(|(&n, g)| n as f64 * g).sum();
                        alpha[j][i].to_f64() * ng
                    })
                    .sum();
                s.abs() < 1e-9
            }),
        };
        if matched {
            let mut term = Complex64::new(1.0, 0.0);
            for j in 0..k {
                let t = &trig[j].terms()[idx[j]];
                let phase: f64 = t.freq.iter().zip(x).map(|(&n, xi)| n as f64 * xi).sum();
                term *= t.amp * e(phase);
            }
            total += term;
        }
        let mut j = 0;
        loop {
            if j == k {
                return Some(total);
            }
            idx[j] += 1;
            if idx[j] < trig[j].terms().len() {
                break;
            }
            idx[j] = 0;
            j += 1;
        }
    }
}

/// Evaluates the limit integral. `alpha` is the `k x l` coefficient matrix
/// of the linearized family (tau bound to pi) and `fs` are observables on
/// `T^m`, `m = x.len()`.
pub fn kronecker_limit(
    alpha: &[Vec<Coeff>],
    fs: &[Observable],
    x: &[f64],
    opts: &KroneckerOptions,
) -> Result<KroneckerLimit, FlowError> {
    let m = check(alpha, fs, x, opts)?;
    let direction = opts.direction.as_deref();
    let lay = layout(alpha, m, direction);
    let x: Vec<f64> = x.iter().map(|&v| frac(v)).collect();

    let mut closed = closed_form(alpha, fs, &x, direction);
    if closed.is_none() && fs.len() == 1 && direction.is_none() && alpha[0].iter().any(|a| !a.is_zero()) {
        closed = Some(fs[0].integral());
    }

    let per = lay.exact.as_ref().and_then(|ex| periods(ex, lay.vars));
    let (plan, method) = match per {
        Some(p) => {
            let r: Vec<f64> = p.iter().map(|&q| q as f64).collect();
            let grid = opts.resolution.checked_pow(lay.vars as u32).filter(|&g| g <= MAX_GRID_POINTS);
            match grid {
                Some(_) => (
                    SamplingPlan::new(r, Scheme::Grid, 0, opts.seed)
                        .with_per_axis(vec![opts.resolution; lay.vars]),
                    Quadrature::PeriodGrid {
                        periods: p,
                        resolution: opts.resolution,
                    },
                ),
                None => (
                    SamplingPlan::monte_carlo(r, opts.samples, opts.seed),
                    Quadrature::PeriodMonteCarlo {
                        periods: p,
                        samples: opts.samples,
                    },
                ),
            }
        }
        None => (
            SamplingPlan::monte_carlo(vec![opts.window; lay.vars], opts.samples, opts.seed),
            Quadrature::WindowMonteCarlo {
                window: opts.window,
                samples: opts.samples,
            },
        ),
    };
    let plan = plan.with_execution(opts.execution);
    let weights = &lay.weights;
    let moments = plan.moments(|u| {
        let mut y = vec![0.0; m];
        let mut v = Complex64::new(1.0, 0.0);
        for (f, w) in fs.iter().zip(weights) {
            for (c, wc) in y.iter_mut().enumerate() {
                let shift: f64 = w[c].iter().zip(u).map(|(a, b)| a * b).sum();
                *wc = frac(x[c] + shift);
            }
            v *= f.eval(&y);
        }
        v
    });
    Ok(KroneckerLimit {
        quadrature: moments.mean(),
        closed_form: closed,
        method,
        points: plan.count(),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::flows::observable::{BoxIndicator, TrigPoly};

    fn ints(rows: &[&[i64]]) -> Vec<Vec<Coeff>> {
        rows.iter().map(|r| r.iter().map(|&v| Coeff::from_int(v)).collect()).collect()
    }

    fn ch(n: i64) -> Observable {
        TrigPoly::character(vec![n]).into()
    }

    #[test]
    fn single_member_gives_the_integral() {
        let b = Observable::Box(BoxIndicator::new(vec![0.2], vec![0.35]).unwrap());
        let r = kronecker_limit(&ints(&[&[1]]), &[b], &[0.4], &KroneckerOptions::default()).unwrap();
        assert_eq!(r.closed_form, Some(Complex64::new(0.35, 0.0)));
        assert!((r.quadrature.re - 0.35).abs() <= 1.0 / 64.0);
    }

    #[test]
    fn frequency_matching_on_a_sum_family() {
        let a = ints(&[&[1, 0], &[0, 1], &[1, 1]]);
        let opts = KroneckerOptions::default();
        let x = [0.17];
        // n1 + n3 = 0 and n2 + n3 = 0 are needed.
        let r = kronecker_limit(&a, &[ch(1), ch(1), ch(-1)], &x, &opts).unwrap();
        let expect = e(0.17);
        assert!((r.closed_form.unwrap() - expect).norm() < 1e-12);
        assert!((r.quadrature - expect).norm() < 1e-9);
        let r = kronecker_limit(&a, &[ch(1), ch(2), ch(-1)], &x, &opts).unwrap();
        assert_eq!(r.closed_form.unwrap(), Complex64::default());
        assert!(r.quadrature.norm() < 1e-9);
    }

    #[test]
    fn rational_coefficients_use_the_period_box() {
        let a = vec![vec![Coeff::from_int(1)], vec![Coeff::from_rational(crate::polyfam::coeff::rat(1, 2))]];
        let r = kronecker_limit(&a, &[ch(1), ch(-2)], &[0.3], &KroneckerOptions::default()).unwrap();
        assert!(matches!(r.method, Quadrature::PeriodGrid { ref periods, .. } if periods == &vec![2]));
        let expect = e(0.3 - 0.6);
        assert!((r.closed_form.unwrap() - expect).norm() < 1e-12);
        assert!((r.quadrature - expect).norm() < 1e-9);
    }

    #[test]
    fn tau_coefficients_use_a_long_window() {
        let a = vec![vec![Coeff::from_int(1)], vec![Coeff::tau_pow(1)]];
        let opts = KroneckerOptions::default();
        let r = kronecker_limit(&a, &[ch(1), ch(1)], &[0.3], &opts).unwrap();
        assert!(matches!(r.method, Quadrature::WindowMonteCarlo { .. }));
        assert_eq!(r.closed_form, Some(Complex64::default()));
        assert!(r.quadrature.norm() < 0.02);
    }

    #[test]
    fn direction_mode_on_a_diagonal_rotation() {
        let a = ints(&[&[1], &[-1]]);
        let f1: Observable = TrigPoly::character(vec![1, 0]).into();
        let f2: Observable = TrigPoly::character(vec![0, 1]).into();
        let x = [0.2, 0.45];
        let opts = KroneckerOptions {
            direction: Some(vec![1.0, 1.0]),
            ..KroneckerOptions::default()
        };
        let r = kronecker_limit(&a, &[f1.clone(), f2.clone()], &x, &opts).unwrap();
        let expect = e(0.65);
        assert!((r.closed_form.unwrap() - expect).norm() < 1e-12);
        assert!((r.quadrature - expect).norm() < 1e-9);
        // Integrating over the whole torus instead gives 0.
        let r = kronecker_limit(&a, &[f1, f2], &x, &KroneckerOptions::default()).unwrap();
        assert!(r.closed_form.unwrap().norm() < 1e-12);
    }
}
