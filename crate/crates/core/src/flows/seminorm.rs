//! Host-Kra seminorms of trigonometric polynomials for an ergodic rotation
//! of `T^1`.
//!
//! For a rotation the cube measures are Haar measures on parallelepipeds,
//! so `||f||_k` is the Gowers norm on the circle:
//! `||f||_k^(2^k) = int_h ||Delta_h f||_(k-1)^(2^(k-1)) dh` with
//! `Delta_h f = f * conj(f(. + h))`, `||f||_1 = |int f|` and
//! `||f||_2^4 = sum |f^(n)|^4`. The closed form evaluates the `h` integrals
//! with an equispaced rule that is exact for the trigonometric polynomial
//! being integrated. The recursion estimate replaces each `h` integral by
//! the finite average over `h = n gamma`, `n = 1..N`.

use num_complex::Complex64;
use serde::{Serialize, Serializer};

use super::flow::looks_rational;
use super::observable::{e, TrigPoly};
use super::FlowError;
use crate::exec::Execution;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SeminormMethod {
    ClosedForm,
    Recursion { n: usize },
}

impl Serialize for SeminormMethod {
    fn serialize<S: Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        use serde::ser::SerializeMap;
        match self {
            SeminormMethod::ClosedForm => s.serialize_str("fourier-closed-form"),
            SeminormMethod::Recursion { n } => {
                #[derive(Serialize)]
                struct Inner {
                    #[serde(rename = "N")]
                    n: usize,
                }
                let mut m = s.serialize_map(Some(1))?;
                m.serialize_entry("recursion-estimate", &Inner { n: *n })?;
                m.end()
            }
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct SeminormValue {
    pub k: usize,
    pub value: f64,
    pub method: SeminormMethod,
}

type Spectrum = Vec<(i64, Complex64)>;

fn spectrum(f: &TrigPoly) -> Spectrum {
    f.terms().iter().map(|t| (t.freq[0], t.amp)).collect()
}

/// `Delta_h g = g * conj(g(. + h))`, merged by frequency.
fn delta(g: &[(i64, Complex64)], h: f64) -> Spectrum {
    let (lo, hi) = g.iter().fold((i64::MAX, i64::MIN), |(a, b), &(n, _)| (a.min(n), b.max(n)));
    let span = (hi - lo) as usize;
    let mut dense = vec![Complex64::default(); 2 * span + 1];
    let shifted: Vec<Complex64> = g.iter().map(|&(b, c)| c.conj() * e(-(b as f64) * h)).collect();
    for &(a, ca) in g {
        for (&(b, _), sb) in g.iter().zip(&shifted) {
            dense[(a - b + span as i64) as usize] += ca * sb;
        }
    }
    dense
        .into_iter()
        .enumerate()
        .filter(|(_, c)| *c != Complex64::default())
        .map(|(i, c)| (i as i64 - span as i64, c))
        .collect()
}

fn mean_sq(g: &[(i64, Complex64)]) -> f64 {
    g.iter().find(|(n, _)| *n == 0).map_or(0.0, |(_, c)| c.norm_sqr())
}

fn fourth_moment(g: &[(i64, Complex64)]) -> f64 {
    g.iter().map(|(_, c)| c.norm_sqr() * c.norm_sqr()).sum()
}

/// `||g||_k^(2^k)` exactly.
fn closed_pow(g: &[(i64, Complex64)], k: usize, exec: Execution) -> f64 {
    match k {
        1 => mean_sq(g),
        2 => fourth_moment(g),
        _ if g.is_empty() => 0.0,
        _ => {
            // Multiplying by a character does not change the norm for k >= 2.
            let (lo, hi) = g.iter().fold((i64::MAX, i64::MIN), |(a, b), &(n, _)| (a.min(n), b.max(n)));
            let c = (lo + hi).div_euclid(2);
            let g: Spectrum = g.iter().map(|&(n, a)| (n - c, a)).collect();
            let w = (hi - c).max(c - lo) as usize;
            // The integrand in h has frequencies at most 2^(k-1) w.
            let nodes = (w << (k - 1)) + 1;
            let vals = exec.map(nodes, |t| {
                closed_pow(&delta(&g, t as f64 / nodes as f64), k - 1, Execution::Sequential)
            });
            vals.iter().sum::<f64>() / nodes as f64
        }
    }
}

/// `||g||_k^(2^k)` through the finite recursion.
fn recursion_pow(g: &[(i64, Complex64)], k: usize, gamma: f64, n: usize, exec: Execution) -> f64 {
    match k {
        1 => mean_sq(g),
        2 => {
            let w: Vec<(f64, f64)> = g.iter().map(|&(v, c)| (v as f64, c.norm_sqr())).collect();
            let vals = exec.map(n, |i| {
                let h = (i + 1) as f64 * gamma;
                let s: Complex64 = w.iter().map(|&(v, p)| p * e(-v * h)).sum();
                s.norm_sqr()
            });
            vals.iter().sum::<f64>() / n as f64
        }
        _ => {
            let vals = exec.map(n, |i| {
                let h = (i + 1) as f64 * gamma;
                recursion_pow(&delta(g, h), k - 1, gamma, n, Execution::Sequential)
            });
            vals.iter().sum::<f64>() / n as f64
        }
    }
}

fn root(p: f64, k: usize) -> f64 {
    p.max(0.0).powf(1.0 / (1u64 << k) as f64)
}

pub fn hk_seminorm_with(
    f: &TrigPoly,
    gamma: f64,
    k: usize,
    method: SeminormMethod,
    exec: Execution,
) -> Result<SeminormValue, FlowError> {
    if f.m() != 1 {
        return Err(FlowError::DimensionMismatch {
            what: "seminorm observable",
            expected: 1,
            found: f.m(),
        });
    }
    if k == 0 || k > 16 {
        return Err(FlowError::InvalidPlan("seminorm order must be in 1..=16".into()));
    }
    if !gamma.is_finite() || gamma == 0.0 || looks_rational(gamma) {
        return Err(FlowError::NonErgodic(format!("rotation number {gamma} looks rational")));
    }
    let g = spectrum(f);
    let p = match method {
        SeminormMethod::ClosedForm => closed_pow(&g, k, exec),
        SeminormMethod::Recursion { n } => {
            if n == 0 {
                return Err(FlowError::InvalidPlan("recursion length must be positive".into()));
            }
            recursion_pow(&g, k, gamma, n, exec)
        }
    };
    Ok(SeminormValue {
        k,
        value: root(p, k),
        method,
    })
}

/// `||f||_k` for the rotation by `gamma` on `T^1`.
pub fn hk_seminorm(f: &TrigPoly, gamma: f64, k: usize, method: SeminormMethod) -> Result<SeminormValue, FlowError> {
    hk_seminorm_with(f, gamma, k, method, Execution::default())
}

#[cfg(test)]
mod tests {
    use super::*;

    fn c(re: f64) -> Complex64 {
        Complex64::new(re, 0.0)
    }

    fn sqrt2() -> f64 {
        2f64.sqrt()
    }

    #[test]
    fn characters_and_constants() {
        let ch = TrigPoly::character(vec![1]);
        let v = |f: &TrigPoly, k| hk_seminorm(f, sqrt2(), k, SeminormMethod::ClosedForm).unwrap().value;
        assert_eq!(v(&ch, 1), 0.0);
        assert_eq!(v(&ch, 2), 1.0);
        assert!((v(&ch, 3) - 1.0).abs() < 1e-12);
        let k = TrigPoly::constant(1, Complex64::new(0.0, -0.7));
        for order in 1..=4 {
            assert!((v(&k, order) - 0.7).abs() < 1e-12);
        }
    }

    #[test]
    fn rational_rotation_is_rejected() {
        let ch = TrigPoly::character(vec![1]);
        assert!(matches!(
            hk_seminorm(&ch, 0.5, 2, SeminormMethod::ClosedForm),
            Err(FlowError::NonErgodic(_))
        ));
    }

    #[test]
    fn recursion_converges_for_a_character() {
        let ch = TrigPoly::character(vec![1]);
        let r = hk_seminorm(&ch, sqrt2(), 2, SeminormMethod::Recursion { n: 500 }).unwrap();
        assert!((r.value - 1.0).abs() < 1e-12);
    }

    #[test]
    fn two_term_third_order_norm_matches_direct_count() {
        // f = a e(0) + b e(x): the U^3 sum runs over 8-tuples from {0, 1}
        // obeying four linear constraints; checked by brute force.
        let (a, b) = (0.6, 0.3);
        let f = TrigPoly::new(1, [(vec![0], c(a)), (vec![1], c(b))]).unwrap();
        let mut total = 0.0;
        for mask in 0u32..256 {
            let n: Vec<i64> = (0..8).map(|i| ((mask >> i) & 1) as i64).collect();
            let sign = |eps: usize| if eps.count_ones().is_multiple_of(2) { 1 } else { -1 };
            let x: i64 = (0..8).map(|eps| sign(eps) * n[eps]).sum();
            let hs = (0..3).all(|bit| (0..8).filter(|e| e >> bit & 1 == 1).map(|e| sign(e) * n[e]).sum::<i64>() == 0);
            if x == 0 && hs {
                total += n.iter().map(|&v| if v == 0 { a } else { b }).product::<f64>();
            }
        }
        let got = hk_seminorm(&f, sqrt2(), 3, SeminormMethod::ClosedForm).unwrap().value;
        assert!((got - total.powf(0.125)).abs() < 1e-12);
    }

    #[test]
    fn method_serialization() {
        let s = serde_json::to_string(&SeminormMethod::Recursion { n: 500 }).unwrap();
        assert_eq!(s, r#"{"recursion-estimate":{"N":500}}"#);
        let s = serde_json::to_string(&SeminormMethod::ClosedForm).unwrap();
        assert_eq!(s, r#""fourier-closed-form""#);
    }
}
