//! Finite or periodic unions of half-open intervals with rational
//! endpoints.

use std::cmp::Ordering;
use std::fmt;

use num_bigint::BigInt;
use num_integer::Integer;
use num_traits::{FromPrimitive, Signed, Zero};
use serde::{Serialize, Serializer};

use super::DensityError;
use crate::polyfam::coeff::{fmt_rational, rational_to_f64, Rational};
use crate::polyfam::parse::{parse_rational, snap_f64};

/// Largest number of intervals produced when expanding periodic templates.
const MAX_EXPANSION: usize = 1 << 20;

/// Tolerance for snapping floating endpoints to nearby small fractions.
pub const SNAP_TOLERANCE: f64 = 1e-9;

/// `[lo, hi)` with `lo < hi`.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct Interval {
    pub lo: Rational,
    pub hi: Rational,
}

impl Interval {
    pub fn new(lo: Rational, hi: Rational) -> Result<Self, DensityError> {
        if lo > hi {
            return Err(DensityError::InvertedInterval {
                lo: fmt_rational(&lo),
                hi: fmt_rational(&hi),
            });
        }
        Ok(Interval { lo, hi })
    }

    pub fn len(&self) -> Rational {
        &self.hi - &self.lo
    }

    pub fn is_empty(&self) -> bool {
        self.lo >= self.hi
    }
}

impl Serialize for Interval {
    fn serialize<S: Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        [fmt_rational(&self.lo), fmt_rational(&self.hi)].serialize(s)
    }
}

/// A subset of R. When `period` is set, `intervals` is a template inside
/// `[0, period)` and the set is `template + period * Z`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct IntervalSet {
    intervals: Vec<Interval>,
    period: Option<Rational>,
}

impl Serialize for IntervalSet {
    fn serialize<S: Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        #[derive(Serialize)]
        struct Repr<'a> {
            intervals: &'a [Interval],
            #[serde(serialize_with = "super::ser_opt_rat")]
            period: &'a Option<Rational>,
        }
        Repr {
            intervals: &self.intervals,
            period: &self.period,
        }
        .serialize(s)
    }
}

/// Sorts, drops empty intervals and merges overlapping or touching ones.
fn normalize(mut v: Vec<Interval>) -> Vec<Interval> {
    v.retain(|i| !i.is_empty());
    v.sort_by(|a, b| a.lo.cmp(&b.lo).then_with(|| a.hi.cmp(&b.hi)));
    let mut out: Vec<Interval> = Vec::with_capacity(v.len());
    for i in v {
        match out.last_mut() {
            Some(last) if i.lo <= last.hi => {
                if i.hi > last.hi {
                    last.hi = i.hi;
                }
            }
            _ => out.push(i),
        }
    }
    out
}

fn floor_div(x: &Rational, q: &Rational) -> BigInt {
    (x / q).floor().to_integer()
}

/// `x mod q` in `[0, q)`.
fn modulo(x: &Rational, q: &Rational) -> Rational {
    x - q * Rational::from_integer(floor_div(x, q))
}

/// Folds intervals into `[0, q)`; anything of length `>= q` covers it.
fn wrap(v: Vec<Interval>, q: &Rational) -> Vec<Interval> {
    let zero = Rational::zero();
    let mut out = Vec::with_capacity(v.len() + 1);
    for i in v {
        if i.is_empty() {
            continue;
        }
        let len = i.len();
        if &len >= q {
            return vec![Interval { lo: zero, hi: q.clone() }];
        }
        let lo = modulo(&i.lo, q);
        let hi = &lo + &len;
        if &hi <= q {
            out.push(Interval { lo, hi });
        } else {
            out.push(Interval { lo, hi: q.clone() });
            out.push(Interval {
                lo: zero.clone(),
                hi: hi - q,
            });
        }
    }
    normalize(out)
}

/// Least common multiple of two positive rationals.
fn rational_lcm(a: &Rational, b: &Rational) -> Rational {
    Rational::new(a.numer().lcm(b.numer()), a.denom().gcd(b.denom()))
}

/// Converts a float endpoint, snapping to a nearby small fraction.
pub fn rational_from_f64(x: f64) -> Option<Rational> {
    if !x.is_finite() {
        return None;
    }
    let r = snap_f64(x, 1_000_000);
    if (rational_to_f64(&r) - x).abs() <= SNAP_TOLERANCE {
        Some(r)
    } else {
        Rational::from_f64(x)
    }
}

impl IntervalSet {
    pub fn empty() -> Self {
        IntervalSet {
            intervals: Vec::new(),
            period: None,
        }
    }

    /// A finite union; inverted input intervals are rejected.
    pub fn new(intervals: Vec<(Rational, Rational)>) -> Result<Self, DensityError> {
        let v = intervals
            .into_iter()
            .map(|(a, b)| Interval::new(a, b))
            .collect::<Result<Vec<_>, _>>()?;
        Ok(IntervalSet {
            intervals: normalize(v),
            period: None,
        })
    }

    /// `template + period * Z`; the template may extend outside `[0, period)`.
    pub fn periodic(template: Vec<(Rational, Rational)>, period: Rational) -> Result<Self, DensityError> {
        if !period.is_positive() {
            return Err(DensityError::NonPositive("period"));
        }
        let v = template
            .into_iter()
            .map(|(a, b)| Interval::new(a, b))
            .collect::<Result<Vec<_>, _>>()?;
        Ok(IntervalSet {
            intervals: wrap(v, &period),
            period: Some(period),
        })
    }

    pub fn from_f64(intervals: &[(f64, f64)]) -> Result<Self, DensityError> {
        let conv = |x: f64| rational_from_f64(x).ok_or(DensityError::NonFinite);
        IntervalSet::new(
            intervals
                .iter()
                .map(|&(a, b)| Ok((conv(a)?, conv(b)?)))
                .collect::<Result<_, DensityError>>()?,
        )
    }

    /// Reads lines `a,b`, with an optional first line `period=q`. Blank
    /// lines and lines starting with `#` are skipped.
    pub fn parse(text: &str) -> Result<Self, DensityError> {
        let mut period = None;
        let mut pairs = Vec::new();
        let value = |s: &str, line: usize| -> Result<Rational, DensityError> {
            let s = s.trim();
            parse_rational(s)
                .or_else(|| s.parse::<f64>().ok().and_then(rational_from_f64))
                .ok_or_else(|| DensityError::Parse {
                    line,
                    message: format!("not a number: '{s}'"),
                })
        };
        for (n, raw) in text.lines().enumerate() {
            let line = raw.trim();
            if line.is_empty() || line.starts_with('#') {
                continue;
            }
            if let Some(q) = line.strip_prefix("period=") {
                if period.is_some() || !pairs.is_empty() {
                    return Err(DensityError::Parse {
                        line: n + 1,
                        message: "period header must come first".into(),
                    });
                }
                period = Some(value(q, n + 1)?);
                continue;
            }
            let Some((a, b)) = line.split_once(',') else {
                return Err(DensityError::Parse {
                    line: n + 1,
                    message: "expected 'a,b'".into(),
                });
            };
            pairs.push((value(a, n + 1)?, value(b, n + 1)?));
        }
        match period {
            Some(q) => IntervalSet::periodic(pairs, q),
            None => IntervalSet::new(pairs),
        }
    }

    pub fn intervals(&self) -> &[Interval] {
        &self.intervals
    }

    pub fn period(&self) -> Option<&Rational> {
        self.period.as_ref()
    }

    pub fn is_empty(&self) -> bool {
        self.intervals.is_empty()
    }

    /// Total length of the finite set, or of the template.
    fn template_measure(&self) -> Rational {
        self.intervals.iter().map(Interval::len).sum()
    }

    /// Exact density of a periodic set.
    pub fn periodic_density(&self) -> Option<Rational> {
        self.period.as_ref().map(|q| self.template_measure() / q)
    }

    /// Bounding interval of a finite nonempty set.
    pub fn hull(&self) -> Option<Interval> {
        if self.period.is_some() {
            return None;
        }
        Some(Interval {
            lo: self.intervals.first()?.lo.clone(),
            hi: self.intervals.last()?.hi.clone(),
        })
    }

    /// The intervals meeting `[a, b)`, clipped to it.
    pub fn materialize(&self, a: &Rational, b: &Rational) -> Result<Vec<Interval>, DensityError> {
        if a >= b {
            return Ok(Vec::new());
        }
        let clip = |i: &Interval, shift: &Rational| -> Option<Interval> {
            let lo = (&i.lo + shift).max(a.clone());
            let hi = (&i.hi + shift).min(b.clone());
            (lo < hi).then_some(Interval { lo, hi })
        };
        match &self.period {
            None => Ok(self.intervals.iter().filter_map(|i| clip(i, &Rational::zero())).collect()),
            Some(q) => {
                let first = floor_div(a, q);
                let last = floor_div(b, q);
                let copies = (&last - &first + 1u32).max(BigInt::zero());
                let size = copies
                    .to_string()
                    .parse::<usize>()
                    .ok()
                    .and_then(|c| c.checked_mul(self.intervals.len()))
                    .filter(|&n| n <= MAX_EXPANSION)
                    .ok_or(DensityError::TooLarge)?;
                let mut out = Vec::with_capacity(size);
                let mut n = first;
                while n <= last {
                    let shift = q * Rational::from_integer(n.clone());
                    out.extend(self.intervals.iter().filter_map(|i| clip(i, &shift)));
                    n += 1;
                }
                Ok(normalize(out))
            }
        }
    }

    /// `m(E cap [0, x))` for `x >= 0` and `-m(E cap [x, 0))` for `x < 0`
    /// on periodic sets.
    fn periodic_cumulative(&self, x: &Rational) -> Rational {
        let q = self.period.as_ref().expect("periodic");
        let n = floor_div(x, q);
        let r = x - q * Rational::from_integer(n.clone());
        let partial: Rational = self
            .intervals
            .iter()
            .filter(|i| i.lo < r)
            .map(|i| i.hi.clone().min(r.clone()) - &i.lo)
            .sum();
        self.template_measure() * Rational::from_integer(n) + partial
    }

    /// `m(E cap [a, b))`.
    pub fn measure(&self, a: &Rational, b: &Rational) -> Rational {
        if a >= b {
            return Rational::zero();
        }
        if self.period.is_some() {
            return self.periodic_cumulative(b) - self.periodic_cumulative(a);
        }
        let start = self.intervals.partition_point(|i| &i.hi <= a);
        let mut total = Rational::zero();
        for i in &self.intervals[start..] {
            if &i.lo >= b {
                break;
            }
            let lo = i.lo.clone().max(a.clone());
            let hi = i.hi.clone().min(b.clone());
            total += hi - lo;
        }
        total
    }

    /// Total measure of a finite set; `None` for periodic sets.
    pub fn total_measure(&self) -> Option<Rational> {
        self.period.is_none().then(|| self.template_measure())
    }

    /// `E + v`.
    pub fn translate(&self, v: &Rational) -> IntervalSet {
        let moved: Vec<Interval> = self
            .intervals
            .iter()
            .map(|i| Interval {
                lo: &i.lo + v,
                hi: &i.hi + v,
            })
            .collect();
        match &self.period {
            None => IntervalSet {
                intervals: moved,
                period: None,
            },
            Some(q) => IntervalSet {
                intervals: wrap(moved, q),
                period: Some(q.clone()),
            },
        }
    }

    /// `E_delta`: points at distance `< delta` from `E`, stored half-open.
    pub fn thicken(&self, delta: &Rational) -> Result<IntervalSet, DensityError> {
        if !delta.is_positive() {
            return Err(DensityError::NonPositive("delta"));
        }
        let grown: Vec<Interval> = self
            .intervals
            .iter()
            .map(|i| Interval {
                lo: &i.lo - delta,
                hi: &i.hi + delta,
            })
            .collect();
        Ok(match &self.period {
            None => IntervalSet {
                intervals: normalize(grown),
                period: None,
            },
            Some(q) => IntervalSet {
                intervals: wrap(grown, q),
                period: Some(q.clone()),
            },
        })
    }

    /// Both sets written over a common period.
    fn common_period(a: &IntervalSet, b: &IntervalSet) -> Result<(Rational, Vec<Interval>, Vec<Interval>), DensityError> {
        let (p, q) = (a.period.as_ref().expect("periodic"), b.period.as_ref().expect("periodic"));
        let l = rational_lcm(p, q);
        let zero = Rational::zero();
        Ok((l.clone(), a.materialize(&zero, &l)?, b.materialize(&zero, &l)?))
    }

    pub fn union(&self, o: &IntervalSet) -> Result<IntervalSet, DensityError> {
        match (&self.period, &o.period) {
            (None, None) => Ok(IntervalSet {
                intervals: normalize(self.intervals.iter().chain(&o.intervals).cloned().collect()),
                period: None,
            }),
            (Some(_), Some(_)) => {
                let (l, a, b) = IntervalSet::common_period(self, o)?;
                Ok(IntervalSet {
                    intervals: normalize(a.into_iter().chain(b).collect()),
                    period: Some(l),
                })
            }
            _ => Err(DensityError::MixedUnion),
        }
    }

    pub fn intersect(&self, o: &IntervalSet) -> Result<IntervalSet, DensityError> {
        match (&self.period, &o.period) {
            (None, None) => Ok(IntervalSet {
                intervals: intersect_sorted(&self.intervals, &o.intervals),
                period: None,
            }),
            (Some(_), Some(_)) => {
                let (l, a, b) = IntervalSet::common_period(self, o)?;
                Ok(IntervalSet {
                    intervals: intersect_sorted(&a, &b),
                    period: Some(l),
                })
            }
            (None, Some(_)) => o.intersect(self),
            (Some(_), None) => {
                let Some(h) = o.hull() else {
                    return Ok(IntervalSet::empty());
                };
                let a = self.materialize(&h.lo, &h.hi)?;
                Ok(IntervalSet {
                    intervals: intersect_sorted(&a, &o.intervals),
                    period: None,
                })
            }
        }
    }

    /// Set inclusion, checked over one common period for periodic sets.
    pub fn is_subset(&self, o: &IntervalSet) -> Result<bool, DensityError> {
        let both = self.intersect(o)?;
        Ok(match (&self.period, &both.period) {
            (Some(p), Some(q)) => both.template_measure() / q == self.template_measure() / p,
            (None, _) => both.template_measure() == self.template_measure(),
            (Some(_), None) => self.is_empty(),
        })
    }

    pub fn contains(&self, x: &Rational) -> bool {
        let x = match &self.period {
            Some(q) => modulo(x, q),
            None => x.clone(),
        };
        let k = self.intervals.partition_point(|i| i.hi <= x);
        self.intervals.get(k).is_some_and(|i| i.lo <= x)
    }
}

fn intersect_sorted(a: &[Interval], b: &[Interval]) -> Vec<Interval> {
    let (mut i, mut j) = (0, 0);
    let mut out = Vec::new();
    while i < a.len() && j < b.len() {
        let lo = a[i].lo.clone().max(b[j].lo.clone());
        let hi = a[i].hi.clone().min(b[j].hi.clone());
        if lo < hi {
            out.push(Interval { lo, hi });
        }
        match a[i].hi.cmp(&b[j].hi) {
            Ordering::Less => i += 1,
            Ordering::Greater => j += 1,
            Ordering::Equal => {
                i += 1;
                j += 1;
            }
        }
    }
    out
}

impl fmt::Display for IntervalSet {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if let Some(q) = &self.period {
            write!(f, "period {}: ", fmt_rational(q))?;
        }
        if self.intervals.is_empty() {
            return write!(f, "{{}}");
        }
        for (n, i) in self.intervals.iter().enumerate() {
            if n > 0 {
                write!(f, " u ")?;
            }
            write!(f, "[{}, {})", fmt_rational(&i.lo), fmt_rational(&i.hi))?;
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::polyfam::coeff::{rat, rat_int};

    fn set(v: &[(i64, i64, i64, i64)]) -> IntervalSet {
        IntervalSet::new(v.iter().map(|&(a, b, c, d)| (rat(a, b), rat(c, d))).collect()).unwrap()
    }

    #[test]
    fn basic_algebra() {
        let a = set(&[(0, 1, 1, 1)]);
        let b = set(&[(1, 2, 2, 1)]);
        assert_eq!(a.union(&b).unwrap(), set(&[(0, 1, 2, 1)]));
        assert_eq!(a.intersect(&b).unwrap(), set(&[(1, 2, 1, 1)]));
        assert_eq!(a.translate(&rat(-1, 4)), set(&[(-1, 4, 3, 4)]));
        assert!(IntervalSet::new(vec![(rat_int(2), rat_int(1))]).is_err());
    }

    #[test]
    fn thickening() {
        let a = set(&[(0, 1, 1, 1)]);
        assert_eq!(a.thicken(&rat(1, 2)).unwrap(), set(&[(-1, 2, 3, 2)]));
        let two = set(&[(0, 1, 1, 1), (13, 10, 2, 1)]);
        assert_eq!(two.thicken(&rat(1, 5)).unwrap().intervals().len(), 1);
        assert!(IntervalSet::empty().thicken(&rat(1, 2)).unwrap().is_empty());
        assert!(a.thicken(&rat_int(0)).is_err());
    }

    #[test]
    fn periodic_sets() {
        let e = IntervalSet::periodic(vec![(rat_int(0), rat(3, 10))], rat_int(1)).unwrap();
        assert_eq!(e.measure(&rat_int(0), &rat_int(7)), rat(21, 10));
        assert_eq!(e.measure(&rat(-1, 2), &rat(1, 10)), rat(1, 10));
        let t = e.thicken(&rat(1, 20)).unwrap();
        assert_eq!(t.intervals().len(), 2);
        assert_eq!(t.periodic_density(), Some(rat(2, 5)));
        assert_eq!(t.translate(&rat_int(3)), t);
        let half = t.translate(&rat(-1, 2));
        assert!(t.intersect(&half).unwrap().is_empty());
        let e3 = IntervalSet::periodic(vec![(rat_int(0), rat(1, 2))], rat(3, 2)).unwrap();
        let both = e.intersect(&e3).unwrap();
        assert_eq!(both.period(), Some(&rat_int(3)));
        assert!(e.contains(&rat(52, 10)) && !e.contains(&rat(-1, 10)));
    }

    #[test]
    fn file_format() {
        let e = IntervalSet::parse("period=1\n# template\n0,0.3\n").unwrap();
        assert_eq!(e.periodic_density(), Some(rat(3, 10)));
        let f = IntervalSet::parse("0,1\n1/2, 2\n").unwrap();
        assert_eq!(f, set(&[(0, 1, 2, 1)]));
        assert!(matches!(IntervalSet::parse("0;1"), Err(DensityError::Parse { line: 1, .. })));
        assert!(IntervalSet::parse("0,1\nperiod=2").is_err());
    }

    #[test]
    fn float_endpoints_snap() {
        let e = IntervalSet::from_f64(&[(0.1, 0.30000000001)]).unwrap();
        assert_eq!(e.intervals()[0].hi, rat(3, 10));
    }
}
