//! Exact linear algebra. Rank and determinants use fraction-free Bareiss
//! elimination over the Laurent ring; solving, kernels and inverses work in
//! the fraction field Q(tau).

use num_bigint::BigInt;
use num_integer::Integer;
use num_traits::{One, Zero};

use super::coeff::{Coeff, RatFunc, Rational};

pub type Matrix<T> = Vec<Vec<T>>;

fn ncols<T>(m: &[Vec<T>]) -> usize {
    m.first().map_or(0, |r| r.len())
}

/// Bareiss forward elimination in place. Returns the pivot columns and the
/// parity of row swaps.
fn bareiss(m: &mut Matrix<Coeff>) -> (Vec<usize>, bool) {
    let rows = m.len();
    let cols = ncols(m);
    let mut prev = Coeff::one();
    let mut r = 0;
    let mut pivots = Vec::new();
    let mut odd = false;
    for c in 0..cols {
        if r == rows {
            break;
        }
        let Some(p) = (r..rows).find(|&i| !m[i][c].is_zero()) else {
            continue;
        };
        if p != r {
            m.swap(p, r);
            odd = !odd;
        }
        for i in r + 1..rows {
            for j in c + 1..cols {
                let num = &(&m[r][c] * &m[i][j]) - &(&m[i][c] * &m[r][j]);
                m[i][j] = num
                    .div_exact(&prev)
                    .expect("Bareiss division is exact in an integral domain");
            }
            m[i][c] = Coeff::zero();
        }
        prev = m[r][c].clone();
        pivots.push(c);
        r += 1;
    }
    (pivots, odd)
}

/// Rank over Q(tau) (equivalently over R, since tau is transcendental).
pub fn rank(m: &[Vec<Coeff>]) -> usize {
    let mut w = m.to_vec();
    bareiss(&mut w).0.len()
}

/// Determinant of a square matrix, computed without fractions.
pub fn det(m: &[Vec<Coeff>]) -> Coeff {
    let n = m.len();
    assert!(m.iter().all(|r| r.len() == n), "det of a non-square matrix");
    if n == 0 {
        return Coeff::one();
    }
    let mut w = m.to_vec();
    let (pivots, odd) = bareiss(&mut w);
    if pivots.len() < n {
        return Coeff::zero();
    }
    let d = w[n - 1][n - 1].clone();
    if odd {
        -d
    } else {
        d
    }
}

pub fn to_ratfunc(m: &[Vec<Coeff>]) -> Matrix<RatFunc> {
    m.iter()
        .map(|r| r.iter().map(RatFunc::from).collect())
        .collect()
}

pub fn transpose<T: Clone>(m: &[Vec<T>]) -> Matrix<T> {
    let c = ncols(m);
    (0..c).map(|j| m.iter().map(|r| r[j].clone()).collect()).collect()
}

/// Reduced row echelon form over Q(tau); returns the pivot columns.
pub fn rref(m: &mut Matrix<RatFunc>) -> Vec<usize> {
    let rows = m.len();
    let cols = ncols(m);
    let mut r = 0;
    let mut pivots = Vec::new();
    for c in 0..cols {
        if r == rows {
            break;
        }
        let Some(p) = (r..rows).find(|&i| !m[i][c].is_zero()) else {
            continue;
        };
        m.swap(p, r);
        let inv = m[r][c].inv().expect("nonzero pivot");
        for j in c..cols {
            m[r][j] = &m[r][j] * &inv;
        }
        for i in 0..rows {
            if i == r || m[i][c].is_zero() {
                continue;
            }
            let f = m[i][c].clone();
            for j in c..cols {
                let t = &f * &m[r][j];
                m[i][j] = &m[i][j] - &t;
            }
        }
        pivots.push(c);
        r += 1;
    }
    pivots
}

/// Basis of the right kernel `{v : M v = 0}`, one vector per free column,
/// with a 1 in that column.
pub fn nullspace(m: &[Vec<RatFunc>], cols: usize) -> Matrix<RatFunc> {
    let mut w = m.to_vec();
    let pivots = rref(&mut w);
    let mut out = Vec::new();
    for free in (0..cols).filter(|c| !pivots.contains(c)) {
        let mut v = vec![RatFunc::zero(); cols];
        v[free] = RatFunc::one();
        for (r, &pc) in pivots.iter().enumerate() {
            v[pc] = -&w[r][free];
        }
        out.push(v);
    }
    out
}

/// Solves `M x = b`; `None` when inconsistent. Free variables are set to 0.
pub fn solve(m: &[Vec<RatFunc>], b: &[RatFunc]) -> Option<Vec<RatFunc>> {
    let cols = ncols(m);
    let mut aug: Matrix<RatFunc> = m
        .iter()
        .zip(b)
        .map(|(r, bi)| {
            let mut row = r.clone();
            row.push(bi.clone());
            row
        })
        .collect();
    let pivots = rref(&mut aug);
    if pivots.contains(&cols) {
        return None;
    }
    let mut x = vec![RatFunc::zero(); cols];
    for (r, &pc) in pivots.iter().enumerate() {
        x[pc] = aug[r][cols].clone();
    }
    Some(x)
}

/// Inverse over Q(tau), `None` if singular.
pub fn inverse(m: &[Vec<RatFunc>]) -> Option<Matrix<RatFunc>> {
    let n = m.len();
    let mut aug: Matrix<RatFunc> = m
        .iter()
        .enumerate()
        .map(|(i, r)| {
            let mut row = r.clone();
            row.extend((0..n).map(|j| if i == j { RatFunc::one() } else { RatFunc::zero() }));
            row
        })
        .collect();
    let pivots = rref(&mut aug);
    if pivots.len() < n || pivots[n - 1] != n - 1 {
        return None;
    }
    Some(aug.into_iter().map(|r| r[n..].to_vec()).collect())
}

/// Inverse of a Laurent matrix whose inverse is again Laurent (for example
/// any matrix with unit determinant).
pub fn inverse_laurent(m: &[Vec<Coeff>]) -> Option<Matrix<Coeff>> {
    inverse(&to_ratfunc(m))?
        .into_iter()
        .map(|r| r.iter().map(|x| x.to_coeff()).collect())
        .collect()
}

pub fn mat_mul(a: &[Vec<Coeff>], b: &[Vec<Coeff>]) -> Matrix<Coeff> {
    let inner = b.len();
    let cols = ncols(b);
    a.iter()
        .map(|row| {
            assert_eq!(row.len(), inner, "matrix shape mismatch");
            (0..cols)
                .map(|j| {
                    let mut acc = Coeff::zero();
                    for (k, x) in row.iter().enumerate() {
                        if !x.is_zero() && !b[k][j].is_zero() {
                            acc = &acc + &(x * &b[k][j]);
                        }
                    }
                    acc
                })
                .collect()
        })
        .collect()
}

pub fn identity(n: usize) -> Matrix<Coeff> {
    (0..n)
        .map(|i| (0..n).map(|j| if i == j { Coeff::one() } else { Coeff::zero() }).collect())
        .collect()
}

/// Scales a Q(tau) vector to a Laurent vector: denominators are cleared
/// and, for purely rational vectors, the result is made primitive. The
/// first nonzero entry is made to have a positive leading coefficient.
pub fn clear_denominators(v: &[RatFunc]) -> Vec<Coeff> {
    let mut den = Coeff::one();
    for x in v {
        if !x.denom().is_one() && den.div_exact(x.denom()).is_none() {
            den = &den * x.denom();
        }
    }
    let den = RatFunc::from(&den);
    let mut out: Vec<Coeff> = v
        .iter()
        .map(|x| (&den * x).to_coeff().expect("denominator cleared"))
        .collect();
    let rationals: Option<Vec<Rational>> = out.iter().map(|c| c.as_rational()).collect();
    if let Some(rs) = rationals {
        let l = rs.iter().fold(BigInt::one(), |l, r| l.lcm(r.denom()));
        let ints: Vec<BigInt> = rs
            .iter()
            .map(|r| (r * Rational::from_integer(l.clone())).to_integer())
            .collect();
        let g = ints.iter().fold(BigInt::zero(), |g, i| g.gcd(i));
        if !g.is_zero() {
            out = ints
                .iter()
                .map(|i| Coeff::from_rational(Rational::from_integer(i / &g)))
                .collect();
        }
    }
    if out.iter().find(|c| !c.is_zero()).is_some_and(|c| c.is_negative_leading()) {
        out = out.iter().map(|c| -c).collect();
    }
    out
}
