use std::str::FromStr;

use num_traits::{One, Signed, ToPrimitive, Zero};
use serde::Serialize;

use super::interval::IntervalSet;
use super::{ser_opt_rat, ser_rat, DensityError};
use crate::complexity::{family_complexity_bounds, SearchOptions};
use crate::exec::Execution;
use crate::polyfam::coeff::{rational_to_f64, Coeff, RatFunc, Rational};
use crate::polyfam::PolyFamily;

/// Largest change between the last two trend values still called
/// converging.
pub const TREND_TOLERANCE: f64 = 1e-2;

/// Number of good grid points kept in a report.
const GOOD_SAMPLE: usize = 32;

/// Window starts `start, start + step, ..., <= end`.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct WindowGrid {
    #[serde(serialize_with = "ser_rat")]
    pub start: Rational,
    #[serde(serialize_with = "ser_rat")]
    pub end: Rational,
    #[serde(serialize_with = "ser_rat")]
    pub step: Rational,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum TrendStatus {
    /// Periodic set, value computed exactly.
    Exact,
    Converging,
    NonConvergent,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct TrendPoint {
    pub window_length: f64,
    pub value: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct DensityEstimate {
    #[serde(serialize_with = "ser_rat")]
    pub window_length: Rational,
    #[serde(serialize_with = "ser_rat")]
    pub best_start: Rational,
    pub value: f64,
    #[serde(serialize_with = "ser_rat")]
    pub value_exact: Rational,
    /// True when the value is the upper Banach density itself (periodic set,
    /// window a multiple of the period).
    pub exact: bool,
    /// Values for the window lengths `L, 2L, 4L, 8L`.
    pub trend: Vec<TrendPoint>,
    pub trend_status: TrendStatus,
}

/// Exact maximum of `m(E cap [M, M+L)) / L`. For periodic sets `M` ranges
/// over a full period; otherwise over `[grid.start, grid.end]`, which
/// defaults to every start meeting the hull. Since the window measure is
/// piecewise linear in `M`, checking grid points and breakpoints gives the
/// exact maximum over the range.
fn window_max(e: &IntervalSet, l: &Rational, grid: Option<&WindowGrid>) -> (Rational, Rational) {
    let zero = Rational::zero();
    let mut candidates: Vec<Rational> = Vec::new();
    let (lo, hi) = match (e.period(), grid) {
        (Some(q), _) => (zero.clone(), q.clone()),
        (None, Some(g)) => (g.start.clone(), g.end.clone()),
        (None, None) => match e.hull() {
            Some(h) => (&h.lo - l, h.hi),
            None => return (zero.clone(), zero),
        },
    };
    candidates.push(lo.clone());
    if let (None, Some(g)) = (e.period(), grid) {
        if g.step.is_positive() {
            let mut m = g.start.clone();
            while m <= g.end {
                candidates.push(m.clone());
                m += &g.step;
            }
        }
    }
    let wrap = |x: Rational| -> Rational {
        match e.period() {
            Some(q) => &x - q * (&x / q).floor(),
            None => x,
        }
    };
    for i in e.intervals() {
        for x in [i.lo.clone(), i.hi.clone(), &i.lo - l, &i.hi - l] {
            let x = wrap(x);
            if x >= lo && x <= hi {
                candidates.push(x);
            }
        }
    }
    candidates.sort();
    candidates.dedup();
    let mut best = (lo, Rational::zero());
    for m in candidates {
        let v = e.measure(&m, &(&m + l)) / l;
        if v > best.1 {
            best = (m, v);
        }
    }
    best
}

/// Largest window density for windows of length `l`, with the trend over
/// `l, 2l, 4l, 8l`. The limsup itself cannot be taken on finite data; for
/// periodic sets the exact density is reported and labeled exact.
pub fn upper_density(
    e: &IntervalSet,
    l: &Rational,
    grid: Option<&WindowGrid>,
) -> Result<DensityEstimate, DensityError> {
    if !l.is_positive() {
        return Err(DensityError::NonPositive("window length"));
    }
    let (best_start, value_exact) = window_max(e, l, grid);
    let mut trend = Vec::with_capacity(4);
    let mut len = l.clone();
    for _ in 0..4 {
        let v = if len == *l {
            value_exact.clone()
        } else {
            window_max(e, &len, grid).1
        };
        trend.push(TrendPoint {
            window_length: rational_to_f64(&len),
            value: rational_to_f64(&v),
        });
        len = &len * Rational::from_integer(2.into());
    }
    let exact = e.period().is_some_and(|q| (l / q).is_integer());
    let trend_status = if e.period().is_some() {
        TrendStatus::Exact
    } else if (trend[3].value - trend[2].value).abs() <= TREND_TOLERANCE {
        TrendStatus::Converging
    } else {
        TrendStatus::NonConvergent
    };
    Ok(DensityEstimate {
        window_length: l.clone(),
        best_start,
        value: rational_to_f64(&value_exact),
        value_exact,
        exact,
        trend,
        trend_status,
    })
}

/// `E_delta cap (E_delta - p_1(s)) cap ... cap (E_delta - p_k(s))`. A zero
/// `delta` uses `E` itself.
pub fn return_set(
    e: &IntervalSet,
    delta: &Rational,
    p: &PolyFamily,
    s: &[Rational],
) -> Result<IntervalSet, DensityError> {
    if s.len() != p.nvars() {
        return Err(DensityError::DimensionMismatch {
            expected: p.nvars(),
            found: s.len(),
        });
    }
    if delta.is_negative() {
        return Err(DensityError::NonPositive("delta"));
    }
    let base = if delta.is_zero() {
        e.clone()
    } else {
        e.thicken(delta)?
    };
    let mut acc = base.clone();
    for (i, q) in p.polys().iter().enumerate() {
        let v = q.eval_rational(s).ok_or(DensityError::NonRationalShift(i + 1))?;
        acc = acc.intersect(&base.translate(&-v))?;
    }
    Ok(acc)
}

pub fn return_density(
    e: &IntervalSet,
    delta: &Rational,
    p: &PolyFamily,
    s: &[Rational],
    l: &Rational,
    grid: Option<&WindowGrid>,
) -> Result<DensityEstimate, DensityError> {
    upper_density(&return_set(e, delta, p, s)?, l, grid)
}

/// Rational multipliers `(l, m, l + m)`, up to order, when the family is
/// `{l p, m p, (l+m) p}` for one polynomial `p` and positive `l, m`.
pub fn arithmetic_shape(p: &PolyFamily) -> Option<Vec<Rational>> {
    if p.len() != 3 {
        return None;
    }
    let base = p.get(0);
    let (e0, c0) = base.terms().find(|(e, _)| e.iter().any(|&x| x > 0))?;
    let c0 = RatFunc::from(c0);
    let mut r = Vec::with_capacity(3);
    for q in p.polys() {
        let ci = RatFunc::from(q.coeff(e0)?);
        let ratio = ci.div(&c0)?.to_coeff()?.as_rational()?;
        if ratio.is_zero() || *q != base.scale(&Coeff::from_rational(ratio.clone())) {
            return None;
        }
        r.push(ratio);
    }
    if r.iter().any(|x| x.is_positive()) && r.iter().any(|x| x.is_negative()) {
        return None;
    }
    let sums = [(0, 1, 2), (0, 2, 1), (1, 2, 0)];
    sums.iter()
        .any(|&(a, b, c)| &r[a] + &r[b] == r[c])
        .then_some(r)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum ThresholdRule {
    /// Generic when complexity is certified at most 1, else the arithmetic
    /// shape rule when it applies, else generic with an uncertified flag.
    Auto,
    /// `D*(E)^(k+1) - eps`; needs complexity 0 or 1.
    Generic,
    /// `D*(E)^4 - eps` for families `{l p, m p, (l+m) p}`.
    ArithmeticShape,
}

impl FromStr for ThresholdRule {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, String> {
        match s {
            "auto" => Ok(ThresholdRule::Auto),
            "generic" => Ok(ThresholdRule::Generic),
            "arithmetic-shape" | "shape" => Ok(ThresholdRule::ArithmeticShape),
            _ => Err(format!("unknown threshold rule '{s}'")),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ScanOptions {
    pub delta: Rational,
    pub epsilon: Rational,
    pub s_max: Rational,
    pub step: Rational,
    /// Window length for the density estimates.
    pub window: Rational,
    pub rule: ThresholdRule,
    pub execution: Execution,
}

impl ScanOptions {
    /// Window length 100 and automatic threshold rule.
    pub fn new(delta: Rational, epsilon: Rational, s_max: Rational, step: Rational) -> Self {
        ScanOptions {
            delta,
            epsilon,
            s_max,
            step,
            window: Rational::from_integer(100.into()),
            rule: ThresholdRule::Auto,
            execution: Execution::default(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ScanPoint {
    pub s: f64,
    pub density: f64,
    pub good: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct GapReport {
    #[serde(serialize_with = "ser_rat")]
    pub s_max: Rational,
    #[serde(serialize_with = "ser_rat")]
    pub step: Rational,
    #[serde(serialize_with = "ser_rat")]
    pub window_length: Rational,
    pub grid_points: usize,
    pub good_points: usize,
    /// The first good grid points, in order.
    pub good_sample: Vec<f64>,
    /// Largest distance between consecutive good points, counting the ends
    /// `0` and `s_max`; `None` when no grid point is good.
    pub max_gap: Option<f64>,
    #[serde(serialize_with = "ser_opt_rat")]
    pub max_gap_exact: Option<Rational>,
    pub threshold: f64,
    #[serde(serialize_with = "ser_rat")]
    pub threshold_exact: Rational,
    pub rule: ThresholdRule,
    pub exponent: u32,
    pub upper_density: f64,
    pub complexity_bound: Option<usize>,
    /// Whether the hypotheses behind the chosen threshold are certified.
    pub hypothesis_certified: bool,
    /// Set for `delta = 0`, which the recurrence statements do not cover.
    pub experimental: bool,
    pub notes: Vec<String>,
    pub profile: Vec<ScanPoint>,
}

/// Scans `s = 0, step, 2 step, ... <= s_max` and marks `s` good when the
/// return density exceeds the threshold. The observed max gap is evidence
/// about syndeticity on the scanned window, not a proof.
pub fn syndetic_scan(
    e: &IntervalSet,
    p: &PolyFamily,
    opts: &ScanOptions,
) -> Result<GapReport, DensityError> {
    if p.nvars() != 1 {
        return Err(DensityError::UnsupportedDimension(p.nvars()));
    }
    let constants = p.nonzero_constants();
    if !constants.is_empty() {
        return Err(DensityError::ConstantTerms(constants.iter().map(|i| i + 1).collect()));
    }
    if !opts.step.is_positive() {
        return Err(DensityError::NonPositive("step"));
    }
    if opts.s_max.is_negative() {
        return Err(DensityError::NonPositive("s_max"));
    }
    if opts.delta.is_negative() {
        return Err(DensityError::NonPositive("delta"));
    }

    let search = SearchOptions {
        execution: opts.execution,
        ..SearchOptions::default()
    };
    let complexity_bound = family_complexity_bounds(p, &search).ok().map(|r| r.family_bound);
    let shape = arithmetic_shape(p);
    let low_complexity = complexity_bound.is_some_and(|b| b <= 1);
    let rule = match opts.rule {
        ThresholdRule::Auto if low_complexity => ThresholdRule::Generic,
        ThresholdRule::Auto if shape.is_some() => ThresholdRule::ArithmeticShape,
        ThresholdRule::Auto => ThresholdRule::Generic,
        ThresholdRule::ArithmeticShape if shape.is_none() => {
            return Err(DensityError::NotArithmeticShape)
        }
        r => r,
    };
    let (exponent, hypothesis_certified) = match rule {
        ThresholdRule::ArithmeticShape => (4, true),
        _ => (p.len() as u32 + 1, low_complexity),
    };

    let d_star = upper_density(e, &opts.window, None)?.value_exact;
    let mut power = Rational::one();
    for _ in 0..exponent {
        power *= &d_star;
    }
    let threshold = power - &opts.epsilon;

    let n = (&opts.s_max / &opts.step)
        .floor()
        .to_integer()
        .to_usize()
        .ok_or(DensityError::TooLarge)?;
    let values = opts.execution.map(n + 1, |i| {
        let s = &opts.step * Rational::from_integer(i.into());
        return_density(e, &opts.delta, p, &[s], &opts.window, None).map(|d| d.value_exact)
    });
    let values = values.into_iter().collect::<Result<Vec<_>, _>>()?;

    let good: Vec<usize> = (0..=n).filter(|&i| values[i] > threshold).collect();
    let at = |i: usize| &opts.step * Rational::from_integer(i.into());
    let max_gap_exact = match (good.first(), good.last()) {
        (Some(&first), Some(&last)) => {
            let mut gap = at(first).max(&opts.s_max - at(last));
            for w in good.windows(2) {
                gap = gap.max(at(w[1] - w[0]));
            }
            Some(gap)
        }
        _ => None,
    };

    let mut notes = vec!["grid scan: the max gap is observed on the scanned window only".to_string()];
    if !hypothesis_certified {
        notes.push(format!(
            "complexity bound {} does not certify the hypotheses of the threshold rule",
            complexity_bound.map_or("unavailable".to_string(), |b| b.to_string())
        ));
    }
    if opts.delta.is_zero() {
        notes.push("delta = 0 is unsupported by the recurrence statements; experimental".into());
    }
    if !threshold.is_positive() {
        notes.push("threshold is not positive, so every grid point is good".into());
    }

    Ok(GapReport {
        s_max: opts.s_max.clone(),
        step: opts.step.clone(),
        window_length: opts.window.clone(),
        grid_points: n + 1,
        good_points: good.len(),
        good_sample: good.iter().take(GOOD_SAMPLE).map(|&i| rational_to_f64(&at(i))).collect(),
        max_gap: max_gap_exact.as_ref().map(rational_to_f64),
        max_gap_exact,
        threshold: rational_to_f64(&threshold),
        threshold_exact: threshold.clone(),
        rule,
        exponent,
        upper_density: rational_to_f64(&d_star),
        complexity_bound,
        hypothesis_certified,
        experimental: opts.delta.is_zero(),
        notes,
        profile: values
            .iter()
            .enumerate()
            .map(|(i, v)| ScanPoint {
                s: rational_to_f64(&at(i)),
                density: rational_to_f64(v),
                good: *v > threshold,
            })
            .collect(),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::polyfam::coeff::{rat, rat_int};

    fn periodic(a: i64, b: i64, den: i64) -> IntervalSet {
        IntervalSet::periodic(vec![(rat(a, den), rat(b, den))], rat_int(1)).unwrap()
    }

    fn fam(s: &str) -> PolyFamily {
        PolyFamily::parse(s, None).unwrap()
    }

    #[test]
    fn densities() {
        let half = periodic(0, 1, 2);
        let d = upper_density(&half, &rat_int(10), None).unwrap();
        assert_eq!(d.value_exact, rat(1, 2));
        assert!(d.exact);
        let block = IntervalSet::new(vec![(rat_int(0), rat_int(3))]).unwrap();
        assert_eq!(upper_density(&block, &rat_int(1), None).unwrap().value_exact, rat_int(1));
        // a window of length 7 always holds exactly 7 copies of [0, 0.3)
        let e = periodic(0, 3, 10);
        assert_eq!(upper_density(&e, &rat_int(7), None).unwrap().value_exact, rat(3, 10));
        // a shorter window can do better than the density
        let d = upper_density(&e, &rat(1, 2), None).unwrap();
        assert_eq!(d.value_exact, rat(3, 5));
        assert!(!d.exact);
    }

    #[test]
    fn bounded_sets_decay() {
        let block = IntervalSet::new(vec![(rat_int(0), rat_int(3))]).unwrap();
        let d = upper_density(&block, &rat_int(2), None).unwrap();
        assert_eq!(d.trend.last().unwrap().value, 3.0 / 16.0);
        assert_eq!(d.trend_status, TrendStatus::NonConvergent);
        let grid = WindowGrid {
            start: rat_int(10),
            end: rat_int(20),
            step: rat_int(1),
        };
        assert_eq!(upper_density(&block, &rat_int(2), Some(&grid)).unwrap().value, 0.0);
    }

    #[test]
    fn return_densities() {
        let e = periodic(0, 3, 10);
        let p = fam("t, 2t");
        let delta = rat(1, 20);
        let thick = e.thicken(&delta).unwrap().periodic_density().unwrap();
        let at = |s: Rational| {
            return_density(&e, &delta, &p, &[s], &rat_int(10), None).unwrap().value_exact
        };
        assert_eq!(at(rat_int(0)), thick);
        assert_eq!(at(rat_int(1)), thick);
        // E_delta = [-0.05, 0.35) mod 1 and E_delta - 0.5 = [0.45, 0.85) mod 1
        assert_eq!(at(rat(1, 2)), rat_int(0));
        // shifts 0.1 and 0.2 leave [0.15, 0.35) mod 1
        assert_eq!(at(rat(1, 10)), rat(1, 5));
        let bad = fam("pi*t");
        assert!(matches!(
            return_density(&e, &delta, &bad, &[rat_int(1)], &rat_int(1), None),
            Err(DensityError::NonRationalShift(1))
        ));
    }

    #[test]
    fn shapes() {
        assert!(arithmetic_shape(&fam("t, 2t, 3t")).is_some());
        assert!(arithmetic_shape(&fam("2t^2, t^2, 3t^2")).is_some());
        assert!(arithmetic_shape(&fam("t, 2t, 4t")).is_none());
        assert!(arithmetic_shape(&fam("t, -2t, 3t")).is_none());
        assert!(arithmetic_shape(&fam("t, t^2, 2t")).is_none());
    }

    #[test]
    fn scan_with_trivial_threshold() {
        let e = periodic(0, 3, 10);
        let opts = ScanOptions::new(rat(1, 20), rat(1, 10), rat_int(5), rat(1, 100));
        let r = syndetic_scan(&e, &fam("t, 2t"), &opts).unwrap();
        assert_eq!(r.rule, ThresholdRule::Generic);
        assert!(r.hypothesis_certified);
        assert_eq!(r.good_points, r.grid_points);
        assert_eq!(r.max_gap_exact, Some(rat(1, 100)));
    }

    #[test]
    fn scan_gaps_repeat_with_the_period() {
        let e = periodic(0, 3, 10);
        let mut opts = ScanOptions::new(rat(1, 20), rat(1, 100), rat_int(3), rat(1, 100));
        let p = fam("t, 2t");
        let short = syndetic_scan(&e, &p, &opts).unwrap();
        opts.s_max = rat_int(6);
        let long = syndetic_scan(&e, &p, &opts).unwrap();
        assert!(short.good_points < short.grid_points);
        assert!(short.max_gap_exact.is_some());
        assert_eq!(short.max_gap_exact, long.max_gap_exact);
    }

    #[test]
    fn scan_gates() {
        let e = periodic(0, 3, 10);
        let opts = ScanOptions::new(rat(1, 20), rat(1, 10), rat_int(1), rat(1, 10));
        assert!(matches!(
            syndetic_scan(&e, &fam("t+1, 2t"), &opts),
            Err(DensityError::ConstantTerms(v)) if v == vec![1]
        ));
        assert!(matches!(
            syndetic_scan(&e, &fam("s, t"), &opts),
            Err(DensityError::UnsupportedDimension(2))
        ));
        let r = syndetic_scan(&e, &fam("t, 2t, 3t, 4t"), &opts).unwrap();
        assert!(!r.hypothesis_certified);
        let shape = ScanOptions {
            rule: ThresholdRule::ArithmeticShape,
            ..opts.clone()
        };
        assert_eq!(syndetic_scan(&e, &fam("t, 2t, 3t"), &shape).unwrap().exponent, 4);
        assert!(matches!(
            syndetic_scan(&e, &fam("t, 2t, 4t"), &shape),
            Err(DensityError::NotArithmeticShape)
        ));
    }
}
