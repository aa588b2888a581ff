//! Sparse multivariate polynomials over an exact (`Coeff`) or floating
//! (`f64`) scalar.

use std::cmp::Ordering;
use std::collections::BTreeMap;
use std::fmt;

use num_traits::Zero;

use super::coeff::{Coeff, Rational};

/// The scalar operations a polynomial needs.
pub trait Scalar: Clone + PartialEq + fmt::Debug + Send + Sync + 'static {
    fn zero() -> Self;
    fn one() -> Self;
    fn is_zero(&self) -> bool;
    fn plus(&self, o: &Self) -> Self;
    fn minus(&self, o: &Self) -> Self;
    fn times(&self, o: &Self) -> Self;
    fn negate(&self) -> Self;
}

impl Scalar for Coeff {
    fn zero() -> Self {
        Coeff::zero()
    }
    fn one() -> Self {
        Coeff::one()
    }
    fn is_zero(&self) -> bool {
        Coeff::is_zero(self)
    }
    fn plus(&self, o: &Self) -> Self {
        self + o
    }
    fn minus(&self, o: &Self) -> Self {
        self - o
    }
    fn times(&self, o: &Self) -> Self {
        self * o
    }
    fn negate(&self) -> Self {
        -self
    }
}

impl Scalar for f64 {
    fn zero() -> Self {
        0.0
    }
    fn one() -> Self {
        1.0
    }
    fn is_zero(&self) -> bool {
        *self == 0.0
    }
    fn plus(&self, o: &Self) -> Self {
        self + o
    }
    fn minus(&self, o: &Self) -> Self {
        self - o
    }
    fn times(&self, o: &Self) -> Self {
        self * o
    }
    fn negate(&self) -> Self {
        -self
    }
}

/// Exponent multi-index, one entry per variable.
pub type Exponent = Vec<u32>;

/// Sparse polynomial in `nvars` variables. Zero coefficients are never
/// stored; the zero polynomial has no terms.
#[derive(Clone, PartialEq, Eq, Hash)]
pub struct Poly<C: Scalar> {
    nvars: usize,
    terms: BTreeMap<Exponent, C>,
}

/// Exact polynomial with coefficients in Q[pi, 1/pi].
pub type MultiPoly = Poly<Coeff>;
/// Polynomial with double-precision coefficients, used by the simulations.
pub type RealPoly = Poly<f64>;

fn total(e: &[u32]) -> u32 {
    e.iter().sum()
}

/// Graded lexicographic order, largest first.
pub fn grlex_desc(a: &[u32], b: &[u32]) -> Ordering {
    total(b).cmp(&total(a)).then_with(|| b.cmp(a))
}

impl<C: Scalar> Poly<C> {
    pub fn zero(nvars: usize) -> Self {
        Poly {
            nvars,
            terms: BTreeMap::new(),
        }
    }

    pub fn constant(nvars: usize, c: C) -> Self {
        let mut p = Poly::zero(nvars);
        p.add_term(vec![0; nvars], c);
        p
    }

    /// The variable with 0-based index `i`.
    pub fn var(nvars: usize, i: usize) -> Self {
        assert!(i < nvars, "variable index out of range");
        let mut e = vec![0; nvars];
        e[i] = 1;
        let mut p = Poly::zero(nvars);
        p.add_term(e, C::one());
        p
    }

    pub fn from_terms<I: IntoIterator<Item = (Exponent, C)>>(nvars: usize, it: I) -> Self {
        let mut p = Poly::zero(nvars);
        for (e, c) in it {
            assert_eq!(e.len(), nvars, "exponent length mismatch");
            p.add_term(e, c);
        }
        p
    }

    /// Linear form `sum_i coeffs[i] * x_i`.
    pub fn linear(coeffs: &[C]) -> Self {
        let n = coeffs.len();
        Poly::from_terms(
            n,
            coeffs.iter().enumerate().map(|(i, c)| {
                let mut e = vec![0; n];
                e[i] = 1;
                (e, c.clone())
            }),
        )
    }

    fn add_term(&mut self, e: Exponent, c: C) {
        if c.is_zero() {
            return;
        }
        match self.terms.get_mut(&e) {
            Some(slot) => {
                let v = slot.plus(&c);
                if v.is_zero() {
                    self.terms.remove(&e);
                } else {
                    *slot = v;
                }
            }
            None => {
                self.terms.insert(e, c);
            }
        }
    }

    pub fn nvars(&self) -> usize {
        self.nvars
    }

    pub fn terms(&self) -> impl Iterator<Item = (&Exponent, &C)> {
        self.terms.iter()
    }

    pub fn num_terms(&self) -> usize {
        self.terms.len()
    }

    pub fn coeff(&self, e: &[u32]) -> Option<&C> {
        self.terms.get(e)
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    /// Total degree, `None` for the zero polynomial (degree -inf).
    pub fn degree(&self) -> Option<u32> {
        self.terms.keys().map(|e| total(e)).max()
    }

    pub fn is_constant(&self) -> bool {
        self.degree().is_none_or(|d| d == 0)
    }

    pub fn constant_term(&self) -> C {
        self.terms
            .get(&vec![0; self.nvars])
            .cloned()
            .unwrap_or_else(C::zero)
    }

    pub fn without_constant(&self) -> Self {
        let mut p = self.clone();
        p.terms.remove(&vec![0; self.nvars]);
        p
    }

    /// True when every non-constant term has degree one.
    pub fn is_affine(&self) -> bool {
        self.terms.keys().all(|e| total(e) <= 1)
    }

    /// Coefficients of the degree-one part, indexed by variable.
    pub fn linear_coeffs(&self) -> Vec<C> {
        let mut out = vec![C::zero(); self.nvars];
        for (e, c) in &self.terms {
            if total(e) == 1 {
                let i = e.iter().position(|&x| x == 1).unwrap();
                out[i] = c.clone();
            }
        }
        out
    }

    pub fn scale(&self, c: &C) -> Self {
        Poly::from_terms(
            self.nvars,
            self.terms.iter().map(|(e, v)| (e.clone(), v.times(c))),
        )
    }

    pub fn add(&self, o: &Self) -> Self {
        assert_eq!(self.nvars, o.nvars, "variable count mismatch");
        let mut p = self.clone();
        for (e, c) in &o.terms {
            p.add_term(e.clone(), c.clone());
        }
        p
    }

    pub fn sub(&self, o: &Self) -> Self {
        self.add(&o.neg())
    }

    pub fn neg(&self) -> Self {
        Poly {
            nvars: self.nvars,
            terms: self
                .terms
                .iter()
                .map(|(e, c)| (e.clone(), c.negate()))
                .collect(),
        }
    }

    pub fn mul(&self, o: &Self) -> Self {
        assert_eq!(self.nvars, o.nvars, "variable count mismatch");
        let mut p = Poly::zero(self.nvars);
        for (ea, ca) in &self.terms {
            for (eb, cb) in &o.terms {
                let e: Exponent = ea.iter().zip(eb).map(|(a, b)| a + b).collect();
                p.add_term(e, ca.times(cb));
            }
        }
        p
    }

    pub fn pow(&self, n: u32) -> Self {
        let mut acc = Poly::constant(self.nvars, C::one());
        for _ in 0..n {
            acc = acc.mul(self);
        }
        acc
    }

    /// Exact evaluation at a point.
    pub fn eval(&self, x: &[C]) -> C {
        assert_eq!(x.len(), self.nvars, "point dimension mismatch");
        let mut acc = C::zero();
        for (e, c) in &self.terms {
            let mut t = c.clone();
            for (xi, &k) in x.iter().zip(e) {
                for _ in 0..k {
                    t = t.times(xi);
                }
            }
            acc = acc.plus(&t);
        }
        acc
    }

    /// Substitutes polynomial `subs[i]` (all in a common variable count) for
    /// variable `i`.
    pub fn compose(&self, subs: &[Poly<C>]) -> Poly<C> {
        assert_eq!(subs.len(), self.nvars, "substitution count mismatch");
        let nv = subs.first().map_or(0, |p| p.nvars);
        let mut out = Poly::zero(nv);
        for (e, c) in &self.terms {
            let mut t = Poly::constant(nv, c.clone());
            for (s, &k) in subs.iter().zip(e) {
                if k > 0 {
                    t = t.mul(&s.pow(k));
                }
            }
            out = out.add(&t);
        }
        out
    }

    /// Terms in graded-lex order, highest first.
    pub fn sorted_terms(&self) -> Vec<(&Exponent, &C)> {
        let mut v: Vec<_> = self.terms.iter().collect();
        v.sort_by(|a, b| grlex_desc(a.0, b.0));
        v
    }
}

impl RealPoly {
    /// Fast evaluation for the simulation loops.
    #[inline]
    pub fn eval_f64(&self, s: &[f64]) -> f64 {
        let mut acc = 0.0;
        for (e, c) in &self.terms {
            let mut t = *c;
            for (x, &k) in s.iter().zip(e) {
                if k > 0 {
                    t *= x.powi(k as i32);
                }
            }
            acc += t;
        }
        acc
    }
}

impl MultiPoly {
    /// Binds tau to pi.
    pub fn lower(&self) -> RealPoly {
        Poly::from_terms(
            self.nvars,
            self.terms.iter().map(|(e, c)| (e.clone(), c.to_f64())),
        )
    }

    /// True when every coefficient is rational (free of tau).
    pub fn is_rational(&self) -> bool {
        self.terms.values().all(Coeff::is_rational)
    }

    /// Exact value at a rational point, when the polynomial is tau-free.
    pub fn eval_rational(&self, x: &[Rational]) -> Option<Rational> {
        let mut acc = Rational::zero();
        for (e, c) in &self.terms {
            let mut t = c.as_rational()?;
            for (xi, &k) in x.iter().zip(e) {
                for _ in 0..k {
                    t *= xi;
                }
            }
            acc += t;
        }
        Some(acc)
    }
}

fn fmt_monomial(e: &[u32]) -> String {
    let parts: Vec<String> = e
        .iter()
        .enumerate()
        .filter(|(_, &k)| k > 0)
        .map(|(i, &k)| {
            if k == 1 {
                format!("u{}", i + 1)
            } else {
                format!("u{}^{}", i + 1, k)
            }
        })
        .collect();
    parts.join("*")
}

/// Canonical printing: graded-lex order, variables `u1..ud`, rationals as
/// `a/b` and powers of tau as `pi^e`.
impl fmt::Display for MultiPoly {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.is_zero() {
            return write!(f, "0");
        }
        for (idx, (e, c)) in self.sorted_terms().into_iter().enumerate() {
            let mono = fmt_monomial(e);
            let single = c.num_terms() == 1;
            let neg = single && c.is_negative_leading();
            let mag = if neg { -c } else { c.clone() };
            if idx == 0 {
                if neg {
                    write!(f, "-")?;
                }
            } else {
                write!(f, " {} ", if neg { '-' } else { '+' })?;
            }
            if mono.is_empty() {
                if single {
                    write!(f, "{mag}")?;
                } else {
                    write!(f, "({mag})")?;
                }
            } else if mag.is_one() {
                write!(f, "{mono}")?;
            } else if single {
                write!(f, "{mag}*{mono}")?;
            } else {
                write!(f, "({mag})*{mono}")?;
            }
        }
        Ok(())
    }
}

impl fmt::Debug for MultiPoly {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "MultiPoly[{}]({})", self.nvars, self)
    }
}

impl fmt::Display for RealPoly {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.is_zero() {
            return write!(f, "0");
        }
        let parts: Vec<String> = self
            .sorted_terms()
            .into_iter()
            .map(|(e, c)| {
                let m = fmt_monomial(e);
                if m.is_empty() {
                    format!("{c}")
                } else {
                    format!("{c}*{m}")
                }
            })
            .collect();
        write!(f, "{}", parts.join(" + "))
    }
}

impl fmt::Debug for RealPoly {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "RealPoly[{}]({})", self.nvars, self)
    }
}
