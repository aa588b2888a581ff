//! Exact scalars: Laurent polynomials in a single transcendental `tau`
//! (bound to pi whenever a number is needed) and the rational function
//! field Q(tau) used by the linear algebra.

use std::cmp::Ordering;
use std::collections::BTreeMap;
use std::fmt;
use std::ops::{Add, Mul, Neg, Sub};

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Signed, ToPrimitive, Zero};

/// Arbitrary-precision rational; always kept in lowest terms with a positive
/// denominator.
pub type Rational = BigRational;

pub fn rat(n: i64, d: i64) -> Rational {
    Rational::new(BigInt::from(n), BigInt::from(d))
}

pub fn rat_int(n: i64) -> Rational {
    Rational::from_integer(BigInt::from(n))
}

/// Renders a rational as `a` or `a/b`.
pub fn fmt_rational(r: &Rational) -> String {
    if r.denom().is_one() {
        r.numer().to_string()
    } else {
        format!("{}/{}", r.numer(), r.denom())
    }
}

pub fn rational_to_f64(r: &Rational) -> f64 {
    r.to_f64().unwrap_or_else(|| {
        // Very large numerators/denominators: scale by bit length.
        let n = r.numer().to_f64().unwrap_or(f64::NAN);
        let d = r.denom().to_f64().unwrap_or(f64::NAN);
        n / d
    })
}

/// An element of Q[tau, 1/tau]: a finite sum of `r_e * tau^e`.
///
/// Zero is the empty map. Monomials `tau^e` are treated as Q-linearly
/// independent, which is exact when tau is transcendental.
#[derive(Clone, PartialEq, Eq, Hash, Default)]
pub struct Coeff {
    terms: BTreeMap<i32, Rational>,
}

impl PartialOrd for Coeff {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl Ord for Coeff {
    fn cmp(&self, other: &Self) -> Ordering {
        // Highest power first, then by value; zero sorts before everything.
        let a = self.terms.iter().rev();
        let b = other.terms.iter().rev();
        for (x, y) in a.zip(b) {
            match x.0.cmp(y.0).then_with(|| x.1.cmp(y.1)) {
                Ordering::Equal => continue,
                o => return o,
            }
        }
        self.terms.len().cmp(&other.terms.len())
    }
}

impl Coeff {
    pub fn zero() -> Self {
        Coeff::default()
    }

    pub fn one() -> Self {
        Coeff::from_rational(Rational::one())
    }

    pub fn from_int(n: i64) -> Self {
        Coeff::from_rational(rat_int(n))
    }

    pub fn from_rational(r: Rational) -> Self {
        Coeff::monomial(r, 0)
    }

    /// `r * tau^e`.
    pub fn monomial(r: Rational, e: i32) -> Self {
        let mut terms = BTreeMap::new();
        if !r.is_zero() {
            terms.insert(e, r);
        }
        Coeff { terms }
    }

    pub fn tau_pow(e: i32) -> Self {
        Coeff::monomial(Rational::one(), e)
    }

    pub fn from_terms<I: IntoIterator<Item = (i32, Rational)>>(it: I) -> Self {
        let mut c = Coeff::zero();
        for (e, r) in it {
            c.add_term(e, r);
        }
        c
    }

    fn add_term(&mut self, e: i32, r: Rational) {
        if r.is_zero() {
            return;
        }
        let slot = self.terms.entry(e).or_insert_with(Rational::zero);
        *slot += r;
        if slot.is_zero() {
            self.terms.remove(&e);
        }
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn is_one(&self) -> bool {
        self.as_rational().is_some_and(|r| r.is_one())
    }

    pub fn terms(&self) -> impl DoubleEndedIterator<Item = (i32, &Rational)> {
        self.terms.iter().map(|(e, r)| (*e, r))
    }

    pub fn num_terms(&self) -> usize {
        self.terms.len()
    }

    /// The value when the coefficient is free of tau.
    pub fn as_rational(&self) -> Option<Rational> {
        match self.terms.len() {
            0 => Some(Rational::zero()),
            1 => self.terms.get(&0).cloned(),
            _ => None,
        }
    }

    pub fn is_rational(&self) -> bool {
        self.terms.keys().all(|&e| e == 0)
    }

    /// `(r, e)` when the coefficient is a unit `r * tau^e`.
    pub fn as_unit(&self) -> Option<(&Rational, i32)> {
        if self.terms.len() == 1 {
            let (e, r) = self.terms.iter().next().unwrap();
            Some((r, *e))
        } else {
            None
        }
    }

    pub fn min_exp(&self) -> Option<i32> {
        self.terms.keys().next().copied()
    }

    pub fn max_exp(&self) -> Option<i32> {
        self.terms.keys().next_back().copied()
    }

    /// Multiplicative inverse; defined only for units.
    pub fn inv(&self) -> Option<Coeff> {
        let (r, e) = self.as_unit()?;
        Some(Coeff::monomial(r.recip(), -e))
    }

    pub fn scale(&self, r: &Rational) -> Coeff {
        if r.is_zero() {
            return Coeff::zero();
        }
        Coeff {
            terms: self.terms.iter().map(|(e, v)| (*e, v * r)).collect(),
        }
    }

    pub fn shift(&self, by: i32) -> Coeff {
        Coeff {
            terms: self.terms.iter().map(|(e, v)| (e + by, v.clone())).collect(),
        }
    }

    pub fn pow(&self, n: u32) -> Coeff {
        let mut acc = Coeff::one();
        for _ in 0..n {
            acc = &acc * self;
        }
        acc
    }

    /// Exact quotient `self / rhs` in Q[tau, 1/tau], or `None` when the
    /// division leaves a remainder (or `rhs` is zero).
    pub fn div_exact(&self, rhs: &Coeff) -> Option<Coeff> {
        if rhs.is_zero() {
            return None;
        }
        if self.is_zero() {
            return Some(Coeff::zero());
        }
        if let Some(inv) = rhs.inv() {
            return Some(self * &inv);
        }
        let (a, ea) = upoly::from_coeff(self);
        let (b, eb) = upoly::from_coeff(rhs);
        let (q, r) = upoly::div_rem(&a, &b);
        if !r.is_empty() {
            return None;
        }
        Some(upoly::to_coeff(&q, ea - eb))
    }

    /// Numeric value with tau bound to pi.
    pub fn to_f64(&self) -> f64 {
        self.terms
            .iter()
            .map(|(e, r)| rational_to_f64(r) * std::f64::consts::PI.powi(*e))
            .sum()
    }

    /// True when the leading (highest tau power) coefficient is negative.
    pub fn is_negative_leading(&self) -> bool {
        self.terms
            .iter()
            .next_back()
            .is_some_and(|(_, r)| r.is_negative())
    }
}

impl fmt::Display for Coeff {
    /// `0`, `3/2`, `pi`, `-pi^2`, `2*pi^-1`, or sums such as `2*pi - 1`
    /// (highest power first).
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.is_zero() {
            return write!(f, "0");
        }
        let mut first = true;
        for (e, r) in self.terms.iter().rev() {
            let neg = r.is_negative();
            let mag = r.abs();
            if first {
                if neg {
                    write!(f, "-")?;
                }
            } else {
                write!(f, " {} ", if neg { '-' } else { '+' })?;
            }
            first = false;
            let tau = match *e {
                0 => None,
                1 => Some("pi".to_string()),
                e => Some(format!("pi^{e}")),
            };
            match tau {
                None => write!(f, "{}", fmt_rational(&mag))?,
                Some(t) if mag.is_one() => write!(f, "{t}")?,
                Some(t) => write!(f, "{}*{t}", fmt_rational(&mag))?,
            }
        }
        Ok(())
    }
}

impl fmt::Debug for Coeff {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "Coeff({self})")
    }
}

impl<'a> Add<&'a Coeff> for &'a Coeff {
    type Output = Coeff;
    fn add(self, rhs: &Coeff) -> Coeff {
        let mut out = self.clone();
        for (e, r) in &rhs.terms {
            out.add_term(*e, r.clone());
        }
        out
    }
}

impl<'a> Sub<&'a Coeff> for &'a Coeff {
    type Output = Coeff;
    fn sub(self, rhs: &Coeff) -> Coeff {
        let mut out = self.clone();
        for (e, r) in &rhs.terms {
            out.add_term(*e, -r.clone());
        }
        out
    }
}

impl<'a> Mul<&'a Coeff> for &'a Coeff {
    type Output = Coeff;
    fn mul(self, rhs: &Coeff) -> Coeff {
        let mut out = Coeff::zero();
        for (ea, ra) in &self.terms {
            for (eb, rb) in &rhs.terms {
                out.add_term(ea + eb, ra * rb);
            }
        }
        out
    }
}

impl Neg for &Coeff {
    type Output = Coeff;
    fn neg(self) -> Coeff {
        Coeff {
            terms: self.terms.iter().map(|(e, r)| (*e, -r.clone())).collect(),
        }
    }
}

macro_rules! forward_owned {
    ($tr:ident, $m:ident) => {
        impl $tr<Coeff> for Coeff {
            type Output = Coeff;
            fn $m(self, rhs: Coeff) -> Coeff {
                (&self).$m(&rhs)
            }
        }
        impl<'a> $tr<&'a Coeff> for Coeff {
            type Output = Coeff;
            fn $m(self, rhs: &Coeff) -> Coeff {
                (&self).$m(rhs)
            }
        }
    };
}
forward_owned!(Add, add);
forward_owned!(Sub, sub);
forward_owned!(Mul, mul);

impl Neg for Coeff {
    type Output = Coeff;
    fn neg(self) -> Coeff {
        -&self
    }
}

impl From<i64> for Coeff {
    fn from(n: i64) -> Self {
        Coeff::from_int(n)
    }
}

impl From<Rational> for Coeff {
    fn from(r: Rational) -> Self {
        Coeff::from_rational(r)
    }
}

/// Serialized as its canonical text, e.g. `"2*pi - 1/2"`.
impl serde::Serialize for Coeff {
    fn serialize<S: serde::Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        s.collect_str(self)
    }
}

/// Dense univariate polynomials over Q (index = power), used for exact
/// division and gcds.
pub(crate) mod upoly {
    use super::{Coeff, Rational};
    use num_traits::Zero;

    pub type Poly = Vec<Rational>;

    pub fn trim(p: &mut Poly) {
        while p.last().is_some_and(|c| c.is_zero()) {
            p.pop();
        }
    }

    /// Splits a nonzero Laurent polynomial into `tau^e * P(tau)` with
    /// `P(0) != 0`.
    pub fn from_coeff(c: &Coeff) -> (Poly, i32) {
        let lo = c.min_exp().unwrap_or(0);
        let hi = c.max_exp().unwrap_or(0);
        let mut p = vec![Rational::zero(); (hi - lo + 1) as usize];
        for (e, r) in c.terms() {
            p[(e - lo) as usize] = r.clone();
        }
        trim(&mut p);
        (p, lo)
    }

    pub fn to_coeff(p: &Poly, shift: i32) -> Coeff {
        Coeff::from_terms(
            p.iter()
                .enumerate()
                .map(|(i, r)| (i as i32 + shift, r.clone())),
        )
    }

    pub fn div_rem(a: &Poly, b: &Poly) -> (Poly, Poly) {
        let mut r = a.clone();
        trim(&mut r);
        let mut b = b.clone();
        trim(&mut b);
        assert!(!b.is_empty(), "polynomial division by zero");
        if r.len() < b.len() {
            return (Vec::new(), r);
        }
        let lead = b.last().unwrap().clone();
        let mut q = vec![Rational::zero(); r.len() - b.len() + 1];
        while r.len() >= b.len() && !r.is_empty() {
            let shift = r.len() - b.len();
            let factor = r.last().unwrap() / &lead;
            for (i, bc) in b.iter().enumerate() {
                let t = &factor * bc;
                r[i + shift] -= t;
            }
            q[shift] = factor;
            r.pop();
            trim(&mut r);
        }
        trim(&mut q);
        (q, r)
    }

    pub fn monic(p: &Poly) -> Poly {
        match p.last() {
            None => Vec::new(),
            Some(l) => {
                let l = l.clone();
                p.iter().map(|c| c / &l).collect()
            }
        }
    }

    pub fn gcd(a: &Poly, b: &Poly) -> Poly {
        let mut x = a.clone();
        let mut y = b.clone();
        trim(&mut x);
        trim(&mut y);
        while !y.is_empty() {
            let (_, r) = div_rem(&x, &y);
            x = y;
            y = r;
        }
        monic(&x)
    }
}

/// An element of the field Q(tau), stored as `num / den` with `den` a monic
/// polynomial in tau with nonzero constant term (all tau powers live in the
/// numerator). The representation is canonical, so `==` is value equality.
#[derive(Clone, PartialEq, Eq, Hash)]
pub struct RatFunc {
    num: Coeff,
    den: Coeff,
}

impl fmt::Debug for RatFunc {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.den.is_one() {
            write!(f, "{}", self.num)
        } else {
            write!(f, "({})/({})", self.num, self.den)
        }
    }
}

impl RatFunc {
    pub fn zero() -> Self {
        RatFunc {
            num: Coeff::zero(),
            den: Coeff::one(),
        }
    }

    pub fn one() -> Self {
        Coeff::one().into()
    }

    pub fn new(num: Coeff, den: Coeff) -> Option<Self> {
        if den.is_zero() {
            return None;
        }
        if num.is_zero() {
            return Some(RatFunc::zero());
        }
        if den.num_terms() == 1 {
            let inv = den.inv().unwrap();
            return Some(RatFunc {
                num: &num * &inv,
                den: Coeff::one(),
            });
        }
        let (n, en) = upoly::from_coeff(&num);
        let (d, ed) = upoly::from_coeff(&den);
        let g = upoly::gcd(&n, &d);
        let (n, _) = upoly::div_rem(&n, &g);
        let (d, _) = upoly::div_rem(&d, &g);
        let lead = d.last().unwrap().clone();
        let n: Vec<Rational> = n.iter().map(|c| c / &lead).collect();
        let d = upoly::monic(&d);
        Some(RatFunc {
            num: upoly::to_coeff(&n, en - ed),
            den: upoly::to_coeff(&d, 0),
        })
    }

    pub fn is_zero(&self) -> bool {
        self.num.is_zero()
    }

    pub fn numer(&self) -> &Coeff {
        &self.num
    }

    pub fn denom(&self) -> &Coeff {
        &self.den
    }

    /// The Laurent polynomial this value equals, if any.
    pub fn to_coeff(&self) -> Option<Coeff> {
        if self.den.is_one() {
            Some(self.num.clone())
        } else {
            None
        }
    }

    pub fn inv(&self) -> Option<RatFunc> {
        RatFunc::new(self.den.clone(), self.num.clone())
    }

    pub fn to_f64(&self) -> f64 {
        self.num.to_f64() / self.den.to_f64()
    }
}

impl From<Coeff> for RatFunc {
    fn from(c: Coeff) -> Self {
        RatFunc {
            num: c,
            den: Coeff::one(),
        }
    }
}

impl From<&Coeff> for RatFunc {
    fn from(c: &Coeff) -> Self {
        c.clone().into()
    }
}

impl<'a> Add<&'a RatFunc> for &'a RatFunc {
    type Output = RatFunc;
    fn add(self, rhs: &RatFunc) -> RatFunc {
        if self.den == rhs.den {
            return RatFunc::new(&self.num + &rhs.num, self.den.clone()).unwrap();
        }
        RatFunc::new(
            &(&self.num * &rhs.den) + &(&rhs.num * &self.den),
            &self.den * &rhs.den,
        )
        .unwrap()
    }
}

impl<'a> Sub<&'a RatFunc> for &'a RatFunc {
    type Output = RatFunc;
    fn sub(self, rhs: &RatFunc) -> RatFunc {
        self + &(-rhs)
    }
}

impl<'a> Mul<&'a RatFunc> for &'a RatFunc {
    type Output = RatFunc;
    fn mul(self, rhs: &RatFunc) -> RatFunc {
        if self.den.is_one() && rhs.den.is_one() {
            return (&self.num * &rhs.num).into();
        }
        RatFunc::new(&self.num * &rhs.num, &self.den * &rhs.den).unwrap()
    }
}

impl Neg for &RatFunc {
    type Output = RatFunc;
    fn neg(self) -> RatFunc {
        RatFunc {
            num: -&self.num,
            den: self.den.clone(),
        }
    }
}

impl RatFunc {
    pub fn div(&self, rhs: &RatFunc) -> Option<RatFunc> {
        Some(self * &rhs.inv()?)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn pi() -> Coeff {
        Coeff::tau_pow(1)
    }

    #[test]
    fn zero_is_empty_and_cancellation_removes_terms() {
        let a = &pi() + &Coeff::one();
        let b = &a - &pi();
        assert_eq!(b, Coeff::one());
        assert!((&b - &Coeff::one()).is_zero());
    }

    #[test]
    fn only_units_invert() {
        let u = Coeff::monomial(rat(2, 3), -2);
        assert_eq!(&u * &u.inv().unwrap(), Coeff::one());
        assert!((&pi() + &Coeff::one()).inv().is_none());
        assert!(Coeff::zero().inv().is_none());
    }

    #[test]
    fn exact_division() {
        // (pi^2 - 1) / (pi - 1) = pi + 1
        let num = &pi().pow(2) - &Coeff::one();
        let den = &pi() - &Coeff::one();
        assert_eq!(num.div_exact(&den).unwrap(), &pi() + &Coeff::one());
        assert!(pi().div_exact(&den).is_none());
        // Laurent shifts survive.
        let num = (&pi().pow(3) - &pi()).shift(-4);
        assert_eq!(
            num.div_exact(&(&pi() + &Coeff::one())).unwrap(),
            (&pi() - &Coeff::one()).shift(-3)
        );
    }

    #[test]
    fn display() {
        assert_eq!(Coeff::zero().to_string(), "0");
        assert_eq!(Coeff::from_rational(rat(-3, 2)).to_string(), "-3/2");
        assert_eq!(pi().to_string(), "pi");
        assert_eq!((-&pi().pow(2)).to_string(), "-pi^2");
        assert_eq!(Coeff::monomial(rat_int(2), -1).to_string(), "2*pi^-1");
        let c = &pi().scale(&rat_int(2)) - &Coeff::one();
        assert_eq!(c.to_string(), "2*pi - 1");
    }

    #[test]
    fn ratfunc_is_canonical() {
        let a = RatFunc::new(&pi() - &Coeff::one(), &pi().pow(2) - &Coeff::one()).unwrap();
        let b = RatFunc::new(Coeff::one(), &pi() + &Coeff::one()).unwrap();
        assert_eq!(a, b);
        let c = RatFunc::new(pi().scale(&rat_int(4)), Coeff::monomial(rat_int(2), 3)).unwrap();
        assert_eq!(c.to_coeff().unwrap(), Coeff::monomial(rat_int(2), -2));
        let back = &(&b * &RatFunc::from(&pi() + &Coeff::one())) - &RatFunc::one();
        assert!(back.is_zero());
    }

    #[test]
    fn to_f64_binds_pi() {
        let c = &pi().pow(2) + &Coeff::from_rational(rat(1, 2));
        let want = std::f64::consts::PI.powi(2) + 0.5;
        assert!((c.to_f64() - want).abs() < 1e-12);
    }
}
