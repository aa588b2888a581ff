//! Recursive-descent parser for polynomial expressions and comma-separated
//! families.
//!
//! ```text
//! expr   := term (('+' | '-') term)*
//! term   := unary (('*' | '/') unary | unary)*      juxtaposition multiplies
//! unary  := ('-' | '+') unary | power
//! power  := atom ('^' '-'? uint)?
//! atom   := uint | ident | '(' expr ')'
//! ident  := 'u' uint | 't' | 's' | 'w' | 'pi'       (+ 'sqrtN', 'sqrt(..)', 'e' for real paths)
//! ```
//!
//! Named variables `s`, `t`, `w` are numbered in that order among the names
//! that actually occur, so `t, t^2` is univariate and `s+t, s-t` bivariate.

use std::collections::BTreeSet;

use num_bigint::BigInt;
use num_traits::{One, Signed, ToPrimitive, Zero};
use thiserror::Error;

use super::coeff::{Coeff, Rational};
use super::poly::{MultiPoly, Poly, RealPoly, Scalar};

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum ParseErrorKind {
    #[error("unexpected character '{0}'")]
    UnexpectedChar(char),
    #[error("unexpected end of input")]
    UnexpectedEnd,
    #[error("unexpected token '{0}'")]
    UnexpectedToken(String),
    #[error("unknown symbol '{0}' (only pi is supported as a transcendental)")]
    UnknownSymbol(String),
    #[error("variable '{name}' is out of range for {nvars} variable(s)")]
    UnknownVariable { name: String, nvars: usize },
    #[error("cannot mix indexed variables (u1, u2, ...) with named ones (s, t, w)")]
    MixedVariableStyles,
    #[error("division by a non-unit coefficient")]
    DivisionByNonUnit,
    #[error("negative power of a non-unit")]
    NegativePowerOfNonUnit,
    #[error("floating-point literal '{0}' in an exact expression")]
    FloatLiteral(String),
    #[error("empty expression")]
    Empty,
}

/// A parse failure with the 1-based column it was detected at.
#[derive(Debug, Clone, PartialEq, Eq, Error)]
#[error("parse error at column {pos}: {kind}")]
pub struct ParseError {
    pub pos: usize,
    pub kind: ParseErrorKind,
}

fn err<T>(pos: usize, kind: ParseErrorKind) -> Result<T, ParseError> {
    Err(ParseError { pos: pos + 1, kind })
}

#[derive(Debug, Clone, PartialEq)]
enum Tok {
    Num(String),
    Ident(String),
    Op(char),
}

fn lex(src: &str) -> Result<Vec<(usize, Tok)>, ParseError> {
    let chars: Vec<char> = src.chars().collect();
    let mut out = Vec::new();
    let mut i = 0;
    while i < chars.len() {
        let c = chars[i];
        if c.is_whitespace() {
            i += 1;
        } else if c.is_ascii_digit() || c == '.' {
            let start = i;
            while i < chars.len() && (chars[i].is_ascii_digit() || chars[i] == '.') {
                i += 1;
            }
            out.push((start, Tok::Num(chars[start..i].iter().collect())));
        } else if c.is_ascii_alphabetic() {
            let start = i;
            // `u12`, `sqrt2`: letters followed by digits form one identifier.
            while i < chars.len() && chars[i].is_ascii_alphabetic() {
                i += 1;
            }
            let word: String = chars[start..i].iter().collect();
            if word == "u" || word == "sqrt" {
                while i < chars.len() && chars[i].is_ascii_digit() {
                    i += 1;
                }
            }
            out.push((start, Tok::Ident(chars[start..i].iter().collect())));
        } else if "+-*/^(),".contains(c) {
            out.push((i, Tok::Op(c)));
            i += 1;
        } else {
            return err(i, ParseErrorKind::UnexpectedChar(c));
        }
    }
    Ok(out)
}

#[derive(Debug, Clone, PartialEq)]
enum Var {
    Indexed(usize),
    Named(char),
}

#[derive(Debug, Clone)]
enum Expr {
    Num(String),
    Pi,
    E,
    Sqrt(Box<Expr>),
    Var(Var),
    Add(Box<Expr>, Box<Expr>),
    Sub(Box<Expr>, Box<Expr>),
    Mul(Box<Expr>, Box<Expr>),
    Div(Box<Expr>, Box<Expr>, usize),
    Neg(Box<Expr>),
    Pow(Box<Expr>, i64, usize),
}

struct Parser {
    toks: Vec<(usize, Tok)>,
    at: usize,
    end: usize,
}

impl Parser {
    fn peek(&self) -> Option<&Tok> {
        self.toks.get(self.at).map(|t| &t.1)
    }

    fn pos(&self) -> usize {
        self.toks.get(self.at).map_or(self.end, |t| t.0)
    }

    fn bump(&mut self) -> Option<Tok> {
        let t = self.toks.get(self.at).map(|t| t.1.clone());
        self.at += 1;
        t
    }

    fn eat(&mut self, c: char) -> bool {
        if self.peek() == Some(&Tok::Op(c)) {
            self.at += 1;
            true
        } else {
            false
        }
    }

    fn expr(&mut self) -> Result<Expr, ParseError> {
        let mut lhs = self.term()?;
        loop {
            if self.eat('+') {
                lhs = Expr::Add(Box::new(lhs), Box::new(self.term()?));
            } else if self.eat('-') {
                lhs = Expr::Sub(Box::new(lhs), Box::new(self.term()?));
            } else {
                return Ok(lhs);
            }
        }
    }

    fn starts_atom(&self) -> bool {
        matches!(
            self.peek(),
            Some(Tok::Num(_)) | Some(Tok::Ident(_)) | Some(Tok::Op('('))
        )
    }

    fn term(&mut self) -> Result<Expr, ParseError> {
        let mut lhs = self.unary()?;
        loop {
            if self.eat('*') {
                lhs = Expr::Mul(Box::new(lhs), Box::new(self.unary()?));
            } else if self.peek() == Some(&Tok::Op('/')) {
                let pos = self.pos();
                self.at += 1;
                lhs = Expr::Div(Box::new(lhs), Box::new(self.unary()?), pos);
            } else if self.starts_atom() {
                lhs = Expr::Mul(Box::new(lhs), Box::new(self.power()?));
            } else {
                return Ok(lhs);
            }
        }
    }

    fn unary(&mut self) -> Result<Expr, ParseError> {
        if self.eat('-') {
            return Ok(Expr::Neg(Box::new(self.unary()?)));
        }
        if self.eat('+') {
            return self.unary();
        }
        self.power()
    }

    fn power(&mut self) -> Result<Expr, ParseError> {
        let base = self.atom()?;
        if self.peek() == Some(&Tok::Op('^')) {
            let pos = self.pos();
            self.at += 1;
            let neg = self.eat('-');
            let p = self.pos();
            match self.bump() {
                Some(Tok::Num(n)) => {
                    let v: i64 = match n.parse() {
                        Ok(v) => v,
                        Err(_) => return err(p, ParseErrorKind::UnexpectedToken(n)),
                    };
                    return Ok(Expr::Pow(Box::new(base), if neg { -v } else { v }, pos));
                }
                Some(t) => return err(p, ParseErrorKind::UnexpectedToken(tok_str(&t))),
                None => return err(p, ParseErrorKind::UnexpectedEnd),
            }
        }
        Ok(base)
    }

    fn atom(&mut self) -> Result<Expr, ParseError> {
        let pos = self.pos();
        match self.bump() {
            Some(Tok::Num(n)) => Ok(Expr::Num(n)),
            Some(Tok::Op('(')) => {
                let e = self.expr()?;
                if !self.eat(')') {
                    let p = self.pos();
                    return match self.peek().cloned() {
                        Some(t) => err(p, ParseErrorKind::UnexpectedToken(tok_str(&t))),
                        None => err(p, ParseErrorKind::UnexpectedEnd),
                    };
                }
                Ok(e)
            }
            Some(Tok::Ident(name)) => self.ident(name, pos),
            Some(t) => err(pos, ParseErrorKind::UnexpectedToken(tok_str(&t))),
            None => err(pos, ParseErrorKind::UnexpectedEnd),
        }
    }

    fn ident(&mut self, name: String, pos: usize) -> Result<Expr, ParseError> {
        match name.as_str() {
            "pi" => Ok(Expr::Pi),
            "e" => Ok(Expr::E),
            "s" | "t" | "w" => Ok(Expr::Var(Var::Named(name.chars().next().unwrap()))),
            "sqrt" if self.peek() == Some(&Tok::Op('(')) => {
                self.at += 1;
                let inner = self.expr()?;
                if !self.eat(')') {
                    return err(self.pos(), ParseErrorKind::UnexpectedEnd);
                }
                Ok(Expr::Sqrt(Box::new(inner)))
            }
            _ => {
                if let Some(rest) = name.strip_prefix("sqrt") {
                    if !rest.is_empty() {
                        return Ok(Expr::Sqrt(Box::new(Expr::Num(rest.to_string()))));
                    }
                }
                if let Some(rest) = name.strip_prefix('u') {
                    if let Ok(i) = rest.parse::<usize>() {
                        if i >= 1 {
                            return Ok(Expr::Var(Var::Indexed(i)));
                        }
                    }
                }
                err(pos, ParseErrorKind::UnknownSymbol(name))
            }
        }
    }
}

fn tok_str(t: &Tok) -> String {
    match t {
        Tok::Num(s) | Tok::Ident(s) => s.clone(),
        Tok::Op(c) => c.to_string(),
    }
}

fn parse_exprs(src: &str) -> Result<Vec<(usize, Expr)>, ParseError> {
    let toks = lex(src)?;
    let mut p = Parser {
        toks,
        at: 0,
        end: src.chars().count(),
    };
    let mut out = Vec::new();
    loop {
        let start = p.pos();
        if p.peek().is_none() || p.peek() == Some(&Tok::Op(',')) {
            return err(start, ParseErrorKind::Empty);
        }
        out.push((start, p.expr()?));
        match p.bump() {
            None => return Ok(out),
            Some(Tok::Op(',')) => continue,
            Some(t) => return err(p.toks[p.at - 1].0, ParseErrorKind::UnexpectedToken(tok_str(&t))),
        }
    }
}

fn collect_vars(e: &Expr, out: &mut Vec<Var>) {
    match e {
        Expr::Var(v) => out.push(v.clone()),
        Expr::Sqrt(a) | Expr::Neg(a) | Expr::Pow(a, _, _) => collect_vars(a, out),
        Expr::Add(a, b) | Expr::Sub(a, b) | Expr::Mul(a, b) | Expr::Div(a, b, _) => {
            collect_vars(a, out);
            collect_vars(b, out);
        }
        Expr::Num(_) | Expr::Pi | Expr::E => {}
    }
}

/// Resolves variable names to 0-based indices.
struct VarMap {
    named: Vec<char>,
    nvars: usize,
}

impl VarMap {
    fn build(exprs: &[(usize, Expr)], nvars: Option<usize>) -> Result<VarMap, ParseError> {
        let mut vars = Vec::new();
        for (_, e) in exprs {
            collect_vars(e, &mut vars);
        }
        let named: BTreeSet<char> = vars
            .iter()
            .filter_map(|v| match v {
                Var::Named(c) => Some(*c),
                _ => None,
            })
            .collect();
        let max_idx = vars
            .iter()
            .filter_map(|v| match v {
                Var::Indexed(i) => Some(*i),
                _ => None,
            })
            .max();
        if !named.is_empty() && max_idx.is_some() {
            return err(0, ParseErrorKind::MixedVariableStyles);
        }
        // s < t < w in that order.
        let order = ['s', 't', 'w'];
        let named: Vec<char> = order.iter().copied().filter(|c| named.contains(c)).collect();
        let needed = max_idx.unwrap_or(named.len());
        let nvars = nvars.unwrap_or(needed.max(1));
        Ok(VarMap { named, nvars })
    }

    fn index(&self, v: &Var) -> Option<usize> {
        let i = match v {
            Var::Indexed(i) => i - 1,
            Var::Named(c) => self.named.iter().position(|x| x == c)?,
        };
        (i < self.nvars).then_some(i)
    }

    fn name(v: &Var) -> String {
        match v {
            Var::Indexed(i) => format!("u{i}"),
            Var::Named(c) => c.to_string(),
        }
    }
}

/// Coefficient types the parser can build.
trait ParseScalar: Scalar {
    const EXACT: bool;
    fn from_literal(lit: &str) -> Option<Self>;
    fn pi() -> Self;
    fn e() -> Option<Self>;
    fn sqrt(&self) -> Option<Self>;
    /// Inverse of a scalar usable as a divisor.
    fn inverse(&self) -> Option<Self>;
}

impl ParseScalar for Coeff {
    const EXACT: bool = true;
    fn from_literal(lit: &str) -> Option<Self> {
        let n: BigInt = lit.parse().ok()?;
        Some(Coeff::from_rational(Rational::from_integer(n)))
    }
    fn pi() -> Self {
        Coeff::tau_pow(1)
    }
    fn e() -> Option<Self> {
        None
    }
    fn sqrt(&self) -> Option<Self> {
        None
    }
    fn inverse(&self) -> Option<Self> {
        self.inv()
    }
}

impl ParseScalar for f64 {
    const EXACT: bool = false;
    fn from_literal(lit: &str) -> Option<Self> {
        lit.parse().ok()
    }
    fn pi() -> Self {
        std::f64::consts::PI
    }
    fn e() -> Option<Self> {
        Some(std::f64::consts::E)
    }
    fn sqrt(&self) -> Option<Self> {
        (*self >= 0.0).then(|| f64::sqrt(*self))
    }
    fn inverse(&self) -> Option<Self> {
        (*self != 0.0).then(|| 1.0 / self)
    }
}

fn as_scalar<C: Scalar>(p: &Poly<C>) -> Option<C> {
    if p.is_constant() {
        Some(p.constant_term())
    } else {
        None
    }
}

fn eval<C: ParseScalar>(e: &Expr, vm: &VarMap, pos: usize) -> Result<Poly<C>, ParseError> {
    let n = vm.nvars;
    Ok(match e {
        Expr::Num(lit) => {
            if C::EXACT && lit.contains('.') {
                return err(pos, ParseErrorKind::FloatLiteral(lit.clone()));
            }
            match C::from_literal(lit) {
                Some(c) => Poly::constant(n, c),
                None => return err(pos, ParseErrorKind::UnexpectedToken(lit.clone())),
            }
        }
        Expr::Pi => Poly::constant(n, C::pi()),
        Expr::E => match C::e() {
            Some(c) => Poly::constant(n, c),
            None => return err(pos, ParseErrorKind::UnknownSymbol("e".into())),
        },
        Expr::Sqrt(a) => {
            let inner = eval::<C>(a, vm, pos)?;
            match as_scalar(&inner).and_then(|c| c.sqrt()) {
                Some(c) => Poly::constant(n, c),
                None => return err(pos, ParseErrorKind::UnknownSymbol("sqrt".into())),
            }
        }
        Expr::Var(v) => match vm.index(v) {
            Some(i) => Poly::var(n, i),
            None => {
                return err(
                    pos,
                    ParseErrorKind::UnknownVariable {
                        name: VarMap::name(v),
                        nvars: n,
                    },
                )
            }
        },
        Expr::Add(a, b) => eval::<C>(a, vm, pos)?.add(&eval(b, vm, pos)?),
        Expr::Sub(a, b) => eval::<C>(a, vm, pos)?.sub(&eval(b, vm, pos)?),
        Expr::Mul(a, b) => eval::<C>(a, vm, pos)?.mul(&eval(b, vm, pos)?),
        Expr::Neg(a) => eval::<C>(a, vm, pos)?.neg(),
        Expr::Div(a, b, at) => {
            let num = eval::<C>(a, vm, pos)?;
            let den = eval::<C>(b, vm, pos)?;
            match as_scalar(&den).and_then(|c| c.inverse()) {
                Some(inv) => num.scale(&inv),
                None => return err(*at, ParseErrorKind::DivisionByNonUnit),
            }
        }
        Expr::Pow(a, k, at) => {
            let base = eval::<C>(a, vm, pos)?;
            if *k >= 0 {
                base.pow(*k as u32)
            } else {
                match as_scalar(&base).and_then(|c| c.inverse()) {
                    Some(inv) => Poly::constant(n, inv).pow(k.unsigned_abs() as u32),
                    None => return err(*at, ParseErrorKind::NegativePowerOfNonUnit),
                }
            }
        }
    })
}

fn parse_generic<C: ParseScalar>(
    src: &str,
    nvars: Option<usize>,
) -> Result<Vec<Poly<C>>, ParseError> {
    let exprs = parse_exprs(src)?;
    let vm = VarMap::build(&exprs, nvars)?;
    exprs.iter().map(|(pos, e)| eval::<C>(e, &vm, *pos)).collect()
}

/// Parses a single exact polynomial in `nvars` variables.
pub fn parse_poly(text: &str, nvars: usize) -> Result<MultiPoly, ParseError> {
    let mut v = parse_generic::<Coeff>(text, Some(nvars))?;
    if v.len() != 1 {
        return err(0, ParseErrorKind::UnexpectedToken(",".into()));
    }
    Ok(v.pop().unwrap())
}

/// Parses a comma-separated exact family. The variable count is inferred
/// when `nvars` is `None`.
pub fn parse_polys(text: &str, nvars: Option<usize>) -> Result<Vec<MultiPoly>, ParseError> {
    parse_generic::<Coeff>(text, nvars)
}

/// Parses comma-separated real-coefficient polynomials (accepts `sqrt2`,
/// `sqrt(3)`, `e` and decimal literals).
pub fn parse_real_polys(text: &str, nvars: Option<usize>) -> Result<Vec<RealPoly>, ParseError> {
    parse_generic::<f64>(text, nvars)
}

/// Evaluates a numeric constant expression such as `sqrt2`, `1/pi` or
/// `0.5*sqrt(3)`.
pub fn parse_real_constant(text: &str) -> Result<f64, ParseError> {
    let v = parse_generic::<f64>(text, Some(1))?;
    if v.len() != 1 || !v[0].is_constant() {
        return err(0, ParseErrorKind::UnexpectedToken(text.to_string()));
    }
    Ok(v[0].constant_term())
}

/// Parses an exact rational written as `a`, `-a/b` or a terminating decimal
/// such as `0.3`.
pub fn parse_rational(text: &str) -> Option<Rational> {
    let t = text.trim();
    let (neg, body) = match t.strip_prefix('-') {
        Some(rest) => (true, rest),
        None => (false, t.strip_prefix('+').unwrap_or(t)),
    };
    let r = if let Some((a, b)) = body.split_once('/') {
        let a: BigInt = a.trim().parse().ok()?;
        let b: BigInt = b.trim().parse().ok()?;
        if b.is_zero() {
            return None;
        }
        Rational::new(a, b)
    } else if let Some((int, frac)) = body.split_once('.') {
        if frac.is_empty() && int.is_empty() {
            return None;
        }
        let int: BigInt = if int.is_empty() { BigInt::zero() } else { int.parse().ok()? };
        let frac_num: BigInt = if frac.is_empty() { BigInt::zero() } else { frac.parse().ok()? };
        let scale = BigInt::from(10).pow(frac.len() as u32);
        Rational::new(int * &scale + frac_num, scale)
    } else {
        Rational::from_integer(body.parse().ok()?)
    };
    Some(if neg { -r } else { r })
}

/// Nearest rational with denominator at most `max_den` (continued-fraction
/// convergents), used to snap floating endpoints.
pub fn snap_f64(x: f64, max_den: u64) -> Rational {
    if !x.is_finite() {
        return Rational::zero();
    }
    let neg = x < 0.0;
    let mut v = x.abs();
    let (mut p0, mut q0, mut p1, mut q1) = (0u128, 1u128, 1u128, 0u128);
    for _ in 0..64 {
        let a = v.floor();
        let ai = a as u128;
        let p2 = ai.saturating_mul(p1).saturating_add(p0);
        let q2 = ai.saturating_mul(q1).saturating_add(q0);
        if q2 > max_den as u128 {
            break;
        }
        (p0, q0, p1, q1) = (p1, q1, p2, q2);
        let frac = v - a;
        if frac < 1e-15 {
            break;
        }
        v = 1.0 / frac;
    }
    let r = Rational::new(BigInt::from(p1), BigInt::from(q1.max(1)));
    if neg {
        -r
    } else {
        r
    }
}

/// Continued-fraction rationality heuristic: `Some((p, q))` when `x` lies
/// within a few ulps of a fraction with `q <= max_den`.
pub fn as_small_fraction(x: f64, max_den: u64) -> Option<(i64, u64)> {
    if !x.is_finite() {
        return None;
    }
    let r = snap_f64(x, max_den);
    let approx = r.numer().to_f64()? / r.denom().to_f64()?;
    let tol = 4.0 * f64::EPSILON * x.abs().max(1.0);
    if (approx - x).abs() <= tol {
        let sign = if r.is_negative() { -1 } else { 1 };
        Some((sign * r.numer().abs().to_i64()?, r.denom().to_u64()?))
    } else {
        None
    }
}

/// True when `x` is (numerically) an integer multiple of 1, i.e. `q == 1`.
pub fn is_integral(r: &Rational) -> bool {
    r.denom().is_one()
}
