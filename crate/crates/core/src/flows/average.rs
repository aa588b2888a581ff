//! Estimators for `(1/|B_R|) int_{B_R} prod_j f_j(T_{p_j(s)} x) ds`.

use num_complex::Complex64;
use serde::Serialize;

use super::flow::Flow;
use super::observable::Observable;
use super::sampling::{SamplingPlan, Scheme};
use super::FlowError;
use crate::polyfam::{parse_real_polys, PolyError, PolyFamily, RealPoly};

/// A family of real-coefficient polynomials, used to drive flows.
#[derive(Debug, Clone, PartialEq)]
pub struct RealFamily {
    nvars: usize,
    polys: Vec<RealPoly>,
}

impl RealFamily {
    pub fn new(polys: Vec<RealPoly>) -> Result<Self, FlowError> {
        let Some(first) = polys.first() else {
            return Err(PolyError::EmptyFamily.into());
        };
        let nvars = first.nvars();
        if let Some(p) = polys.iter().find(|p| p.nvars() != nvars) {
            return Err(PolyError::MismatchedVars {
                expected: nvars,
                found: p.nvars(),
            }
            .into());
        }
        Ok(RealFamily { nvars, polys })
    }

    /// Parses real-coefficient polynomials such as `sqrt2*s, sqrt(3)*s^2`.
    pub fn parse(text: &str, nvars: Option<usize>) -> Result<Self, FlowError> {
        let polys = parse_real_polys(text, nvars).map_err(PolyError::from)?;
        RealFamily::new(polys)
    }

    pub fn nvars(&self) -> usize {
        self.nvars
    }

    pub fn len(&self) -> usize {
        self.polys.len()
    }

    pub fn is_empty(&self) -> bool {
        self.polys.is_empty()
    }

    pub fn polys(&self) -> &[RealPoly] {
        &self.polys
    }

    pub fn is_constant(&self) -> bool {
        self.polys.iter().all(|p| p.is_constant())
    }
}

impl From<&PolyFamily> for RealFamily {
    fn from(f: &PolyFamily) -> Self {
        RealFamily {
            nvars: f.nvars(),
            polys: f.polys().iter().map(|p| p.lower()).collect(),
        }
    }
}

impl std::fmt::Display for RealFamily {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        for (i, p) in self.polys.iter().enumerate() {
            if i > 0 {
                write!(f, ", ")?;
            }
            write!(f, "{p}")?;
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct AverageEstimate {
    /// Serialized as `[re, im]`.
    pub value: Complex64,
    /// Standard error; reported for Monte Carlo plans and exact shortcuts.
    pub stderr: Option<f64>,
    pub samples: usize,
    pub scheme: Scheme,
    pub seed: u64,
    #[serde(rename = "R")]
    pub r: Vec<f64>,
}

pub(crate) fn check_inputs(
    flow: &dyn Flow,
    fam: &RealFamily,
    fs: &[Observable],
    plan: &SamplingPlan,
) -> Result<(), FlowError> {
    plan.validate()?;
    if fs.len() != fam.len() {
        return Err(FlowError::DimensionMismatch {
            what: "observables",
            expected: fam.len(),
            found: fs.len(),
        });
    }
    if plan.d() != fam.nvars() {
        return Err(FlowError::DimensionMismatch {
            what: "plan dimension",
            expected: fam.nvars(),
            found: plan.d(),
        });
    }
    for f in fs {
        if f.dim() != flow.dim() {
            return Err(FlowError::DimensionMismatch {
                what: "observable dimension",
                expected: flow.dim(),
                found: f.dim(),
            });
        }
        f.validate()?;
    }
    Ok(())
}

/// The integrand `prod_j f_j(T_{p_j(s)} x)`.
#[inline]
pub(crate) fn integrand(
    flow: &dyn Flow,
    fam: &RealFamily,
    fs: &[Observable],
    x: &[f64],
    s: &[f64],
    buf: &mut [f64],
) -> Complex64 {
    let mut v = Complex64::new(1.0, 0.0);
    for (p, f) in fam.polys().iter().zip(fs) {
        flow.apply_into(p.eval_f64(s), x, buf);
        v *= f.eval(buf);
    }
    v
}

/// Pointwise estimate of the multiparameter average at `x`.
pub fn multi_average(
    flow: &dyn Flow,
    fam: &RealFamily,
    fs: &[Observable],
    x: &[f64],
    plan: &SamplingPlan,
) -> Result<AverageEstimate, FlowError> {
    check_inputs(flow, fam, fs, plan)?;
    if x.len() != flow.dim() {
        return Err(FlowError::DimensionMismatch {
            what: "point",
            expected: flow.dim(),
            found: x.len(),
        });
    }
    let x = flow.reduce(x);
    let record = |value, stderr| AverageEstimate {
        value,
        stderr,
        samples: plan.count(),
        scheme: plan.scheme,
        seed: plan.seed,
        r: plan.r.clone(),
    };
    let constants: Option<Vec<Complex64>> = fs.iter().map(Observable::constant_value).collect();
    if let Some(cs) = constants {
        return Ok(record(cs.iter().product(), Some(0.0)));
    }
    let dim = flow.dim();
    let m = plan
        .fold(
            || (super::sampling::Moments::default(), vec![0.0; dim]),
            |(m, buf), s| m.push(integrand(flow, fam, fs, &x, s, buf)),
        )
        .iter()
        .fold(super::sampling::Moments::default(), |a, (b, _)| a.merge(b));
    let stderr = (plan.scheme == Scheme::MonteCarlo).then(|| m.stderr());
    Ok(record(m.mean(), stderr))
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct L2Deviation {
    /// Mean of `|estimate(x) - reference(x)|^2` over the x-grid.
    pub mean_square: f64,
    /// Its square root.
    pub rms: f64,
    pub max_abs: f64,
    pub points: usize,
}

/// Midpoints of a `per_axis^m` grid in `[0,1)^m`.
pub fn x_grid(m: usize, per_axis: usize) -> Vec<Vec<f64>> {
    let total = per_axis.pow(m as u32);
    (0..total)
        .map(|mut i| {
            (0..m)
                .map(|_| {
                    let k = i % per_axis;
                    i /= per_axis;
                    (k as f64 + 0.5) / per_axis as f64
                })
                .collect()
        })
        .collect()
}

/// The L^2 variant: compares pointwise estimates against `reference` on a
/// `per_axis^m` grid of starting points (32 per axis by default).
pub fn multi_average_l2<R>(
    flow: &dyn Flow,
    fam: &RealFamily,
    fs: &[Observable],
    reference: R,
    plan: &SamplingPlan,
    per_axis: usize,
) -> Result<L2Deviation, FlowError>
where
    R: Fn(&[f64]) -> Complex64,
{
    let xs = x_grid(flow.dim(), per_axis.max(1));
    let mut sum = 0.0;
    let mut max_abs: f64 = 0.0;
    for x in &xs {
        let est = multi_average(flow, fam, fs, x, plan)?;
        let d = (est.value - reference(x)).norm();
        sum += d * d;
        max_abs = max_abs.max(d);
    }
    let mean_square = sum / xs.len() as f64;
    Ok(L2Deviation {
        mean_square,
        rms: mean_square.sqrt(),
        max_abs,
        points: xs.len(),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::flows::flow::{HeisenbergFlow, TorusFlow};
    use crate::flows::observable::{BoxIndicator, TrigPoly};

    fn c(re: f64) -> Complex64 {
        Complex64::new(re, 0.0)
    }

    #[test]
    fn constants_are_exact_for_every_plan() {
        let flow = TorusFlow::new(vec![2f64.sqrt()]);
        let fam = RealFamily::parse("s, s^2", None).unwrap();
        let fs: Vec<Observable> = vec![
            TrigPoly::constant(1, c(0.3)).into(),
            TrigPoly::constant(1, Complex64::new(0.1, 0.7)).into(),
        ];
        for scheme in [Scheme::Grid, Scheme::MonteCarlo, Scheme::LowDiscrepancy] {
            let plan = SamplingPlan::new(vec![100.0], scheme, 1000, 5);
            let est = multi_average(&flow, &fam, &fs, &[0.2], &plan).unwrap();
            assert_eq!(est.value, c(0.3) * Complex64::new(0.1, 0.7));
            assert_eq!(est.stderr, Some(0.0));
        }
    }

    #[test]
    fn ergodic_average_of_a_character_vanishes() {
        let flow = TorusFlow::new(vec![2f64.sqrt()]);
        let fam = RealFamily::parse("s", None).unwrap();
        let fs: Vec<Observable> = vec![TrigPoly::character(vec![1]).into()];
        let mut last = f64::INFINITY;
        for r in [10.0, 100.0, 1000.0] {
            let plan = SamplingPlan::new(vec![r], Scheme::Grid, 100_000, 0);
            let v = multi_average(&flow, &fam, &fs, &[0.3], &plan).unwrap().value.norm();
            assert!(v < last);
            last = v;
        }
        assert!(last < 1e-3);
    }

    #[test]
    fn box_average_on_the_heisenberg_flow() {
        let flow = HeisenbergFlow::new(1.0, 2f64.sqrt(), 0.0);
        let fam = RealFamily::parse("s", None).unwrap();
        let b = BoxIndicator::new(vec![0.0, 0.0, 0.25], vec![1.0, 1.0, 0.5]).unwrap();
        let plan = SamplingPlan::monte_carlo(vec![2000.0], 100_000, 1);
        let est = multi_average(&flow, &fam, &[Observable::Box(b)], &[0.1, 0.2, 0.3], &plan).unwrap();
        assert!((est.value.re - 0.5).abs() < 0.02);
        assert!(est.stderr.unwrap() > 0.0);
    }

    #[test]
    fn dimension_errors() {
        let flow = TorusFlow::new(vec![1.0]);
        let fam = RealFamily::parse("s, t", None).unwrap();
        let f: Observable = TrigPoly::character(vec![1]).into();
        let plan = SamplingPlan::monte_carlo(vec![1.0, 1.0], 10, 0);
        assert!(multi_average(&flow, &fam, std::slice::from_ref(&f), &[0.0], &plan).is_err());
        let plan1 = SamplingPlan::monte_carlo(vec![1.0], 10, 0);
        assert!(multi_average(&flow, &fam, &[f.clone(), f.clone()], &[0.0], &plan1).is_err());
        assert!(multi_average(&flow, &fam, &[f.clone(), f], &[0.0], &plan).is_ok());
    }
}
