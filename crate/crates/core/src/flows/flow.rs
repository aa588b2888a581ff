//! Torus rotations and the Heisenberg nilflow on `G / Gamma` with
//! `G` the upper triangular unipotent group and `Gamma` its integer points.

use serde::{Deserialize, Serialize};

use crate::polyfam::parse::as_small_fraction;

/// Denominator bound for the numerical rationality test.
pub const RATIONAL_MAX_DEN: u64 = 1_000_000;

/// `x mod 1` in `[0, 1)`.
#[inline]
pub fn frac(x: f64) -> f64 {
    let f = x - x.floor();
    if f >= 1.0 {
        0.0
    } else {
        f
    }
}

/// Distance from `x` to the nearest integer.
#[inline]
pub fn circle_dist(x: f64) -> f64 {
    (x - x.round()).abs()
}

/// True when `x` is numerically a fraction with a small denominator.
pub fn looks_rational(x: f64) -> bool {
    as_small_fraction(x, RATIONAL_MAX_DEN).is_some()
}

/// A measure preserving flow acting on reduced coordinates in `[0,1)^dim`.
pub trait Flow: Send + Sync {
    fn dim(&self) -> usize;

    /// Writes `T_t(x)` into `out`, reduced to the fundamental domain.
    fn apply_into(&self, t: f64, x: &[f64], out: &mut [f64]);

    /// Maps an arbitrary coordinate vector to the fundamental domain.
    fn reduce(&self, x: &[f64]) -> Vec<f64>;

    /// Distance between two reduced points of the phase space.
    fn distance(&self, a: &[f64], b: &[f64]) -> f64;

    fn apply(&self, t: f64, x: &[f64]) -> Vec<f64> {
        let mut out = vec![0.0; self.dim()];
        self.apply_into(t, x, &mut out);
        out
    }
}

/// A nonzero integer vector `n` with `|n_i| <= bound` and `n . c = 0` up to
/// rounding for every `c` in `constraints`; all constraints share one length.
pub fn integer_relation(constraints: &[Vec<f64>], bound: i64) -> Option<Vec<i64>> {
    let m = constraints.first().map_or(0, Vec::len);
    if m == 0 {
        return None;
    }
    let mut n = vec![-bound; m];
    loop {
        if n.iter().any(|&v| v != 0)
            && constraints.iter().all(|c| {
                let dot: f64 = n.iter().zip(c).map(|(&a, g)| a as f64 * g).sum();
                let scale: f64 = n.iter().zip(c).map(|(&a, g)| (a as f64 * g).abs()).sum();
                dot.abs() <= 1e-12 * scale.max(1.0)
            })
        {
            return Some(n);
        }
        let mut i = 0;
        loop {
            if i == m {
                return None;
            }
            if n[i] < bound {
                n[i] += 1;
                break;
            }
            n[i] = -bound;
            i += 1;
        }
    }
}

/// `T_t(x) = x + t * gamma mod 1` on `T^m`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TorusFlow {
    pub gamma: Vec<f64>,
}

impl TorusFlow {
    pub fn new(gamma: Vec<f64>) -> Self {
        TorusFlow { gamma }
    }

    pub fn m(&self) -> usize {
        self.gamma.len()
    }

    /// A nonzero integer vector `n` with `|n_i| <= bound` and `n . gamma = 0`
    /// up to rounding, if one exists. The flow is ergodic iff no such `n`
    /// exists for any bound; `None` means it looks ergodic at this depth.
    pub fn resonance(&self, bound: i64) -> Option<Vec<i64>> {
        integer_relation(std::slice::from_ref(&self.gamma), bound)
    }

    pub fn is_ergodic(&self) -> bool {
        self.resonance(6).is_none()
    }
}

impl Flow for TorusFlow {
    fn dim(&self) -> usize {
        self.gamma.len()
    }

    #[inline]
    fn apply_into(&self, t: f64, x: &[f64], out: &mut [f64]) {
        for ((o, &xi), &g) in out.iter_mut().zip(x).zip(&self.gamma) {
            *o = frac(xi + t * g);
        }
    }

    fn reduce(&self, x: &[f64]) -> Vec<f64> {
        x.iter().map(|&v| frac(v)).collect()
    }

    fn distance(&self, a: &[f64], b: &[f64]) -> f64 {
        a.iter()
            .zip(b)
            .map(|(x, y)| circle_dist(x - y))
            .fold(0.0, f64::max)
    }
}

/// A Heisenberg group element `(x, y, z)`.
pub type Heis = [f64; 3];

/// `(x,y,z) (x',y',z') = (x+x', y+y', z+z'+x y')`.
#[inline]
pub fn heis_mul(a: Heis, b: Heis) -> Heis {
    [a[0] + b[0], a[1] + b[1], a[2] + b[2] + a[0] * b[1]]
}

#[inline]
pub fn heis_inv(a: Heis) -> Heis {
    [-a[0], -a[1], -a[2] + a[0] * a[1]]
}

/// Right multiplication by `(-floor x, 0, 0)`, then `(0, -floor y, 0)`, then
/// `(0, 0, -floor z)`. The result lies in `[0,1)^3`.
#[inline]
pub fn heis_reduce(g: Heis) -> Heis {
    let x = frac(g[0]);
    let fy = g[1].floor();
    let mut y = g[1] - fy;
    let mut z = g[2] - x * fy;
    if y >= 1.0 {
        y = 0.0;
        z -= x;
    }
    [x, y, frac(z)]
}

/// The nilflow `T_t(g Gamma) = a_t g Gamma` with
/// `a_t = (alpha t, beta t, zeta t + alpha beta t^2 / 2)`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct HeisenbergFlow {
    pub alpha: f64,
    pub beta: f64,
    pub zeta: f64,
}

impl HeisenbergFlow {
    pub fn new(alpha: f64, beta: f64, zeta: f64) -> Self {
        HeisenbergFlow { alpha, beta, zeta }
    }

    /// The one-parameter subgroup element `a_t`.
    #[inline]
    pub fn element(&self, t: f64) -> Heis {
        [
            self.alpha * t,
            self.beta * t,
            self.zeta * t + 0.5 * self.alpha * self.beta * t * t,
        ]
    }

    /// The induced rotation on the base torus `T^2`.
    pub fn base(&self) -> TorusFlow {
        TorusFlow::new(vec![self.alpha, self.beta])
    }

    /// The base rotation is ergodic iff `alpha` and `beta` are rationally
    /// independent; checked heuristically.
    pub fn base_is_ergodic(&self) -> bool {
        self.base().is_ergodic()
    }
}

impl Flow for HeisenbergFlow {
    fn dim(&self) -> usize {
        3
    }

    #[inline]
    fn apply_into(&self, t: f64, x: &[f64], out: &mut [f64]) {
        let g = heis_reduce(heis_mul(self.element(t), [x[0], x[1], x[2]]));
        out.copy_from_slice(&g);
    }

    fn reduce(&self, x: &[f64]) -> Vec<f64> {
        heis_reduce([x[0], x[1], x[2]]).to_vec()
    }

    /// Size of `a^{-1} b` after removing its nearest lattice element.
    fn distance(&self, a: &[f64], b: &[f64]) -> f64 {
        let h = heis_mul(heis_inv([a[0], a[1], a[2]]), [b[0], b[1], b[2]]);
        let (mx, my) = (h[0].round(), h[1].round());
        let r = heis_mul(heis_mul(h, [-mx, 0.0, 0.0]), [0.0, -my, 0.0]);
        r[0].abs().max(r[1].abs()).max(circle_dist(r[2]))
    }
}

/// Flow configurations accepted from run configs.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum FlowSpec {
    Torus(TorusFlow),
    Heisenberg(HeisenbergFlow),
}

impl Flow for FlowSpec {
    fn dim(&self) -> usize {
        match self {
            FlowSpec::Torus(f) => f.dim(),
            FlowSpec::Heisenberg(f) => f.dim(),
        }
    }

    fn apply_into(&self, t: f64, x: &[f64], out: &mut [f64]) {
        match self {
            FlowSpec::Torus(f) => f.apply_into(t, x, out),
            FlowSpec::Heisenberg(f) => f.apply_into(t, x, out),
        }
    }

    fn reduce(&self, x: &[f64]) -> Vec<f64> {
        match self {
            FlowSpec::Torus(f) => f.reduce(x),
            FlowSpec::Heisenberg(f) => f.reduce(x),
        }
    }

    fn distance(&self, a: &[f64], b: &[f64]) -> f64 {
        match self {
            FlowSpec::Torus(f) => f.distance(a, b),
            FlowSpec::Heisenberg(f) => f.distance(a, b),
        }
    }
}
