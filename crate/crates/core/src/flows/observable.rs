//! Bounded functions on `[0,1)^m`: trigonometric polynomials, box
//! indicators and boxes with a linear edge ramp.

use std::collections::BTreeMap;
use std::f64::consts::TAU;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use super::FlowError;

/// `e(t) = exp(2 pi i t)`.
#[inline]
pub fn e(t: f64) -> Complex64 {
    let (s, c) = (TAU * t).sin_cos();
    Complex64::new(c, s)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Term {
    pub freq: Vec<i64>,
    pub amp: Complex64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
struct TrigPolyRepr {
    m: usize,
    terms: Vec<Term>,
}

/// `sum_n c_n e(n . x)` with finitely many integer frequencies `n`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "TrigPolyRepr", into = "TrigPolyRepr")]
pub struct TrigPoly {
    m: usize,
    terms: Vec<Term>,
}

impl TryFrom<TrigPolyRepr> for TrigPoly {
    type Error = FlowError;

    fn try_from(r: TrigPolyRepr) -> Result<Self, FlowError> {
        TrigPoly::new(r.m, r.terms.into_iter().map(|t| (t.freq, t.amp)))
    }
}

impl From<TrigPoly> for TrigPolyRepr {
    fn from(p: TrigPoly) -> Self {
        TrigPolyRepr {
            m: p.m,
            terms: p.terms,
        }
    }
}

impl TrigPoly {
    /// Merges repeated frequencies and drops zero amplitudes.
    pub fn new<I>(m: usize, terms: I) -> Result<Self, FlowError>
    where
        I: IntoIterator<Item = (Vec<i64>, Complex64)>,
    {
        let mut map: BTreeMap<Vec<i64>, Complex64> = BTreeMap::new();
        for (freq, amp) in terms {
            if freq.len() != m {
                return Err(FlowError::DimensionMismatch {
                    what: "frequency",
                    expected: m,
                    found: freq.len(),
                });
            }
            if !amp.re.is_finite() || !amp.im.is_finite() {
                return Err(FlowError::InvalidObservable("non-finite amplitude".into()));
            }
            *map.entry(freq).or_default() += amp;
        }
        Ok(TrigPoly {
            m,
            terms: map
                .into_iter()
                .filter(|(_, a)| *a != Complex64::default())
                .map(|(freq, amp)| Term { freq, amp })
                .collect(),
        })
    }

    pub fn constant(m: usize, c: Complex64) -> Self {
        TrigPoly::new(m, [(vec![0; m], c)]).expect("valid constant")
    }

    /// `e(n . x)`.
    pub fn character(freq: Vec<i64>) -> Self {
        let m = freq.len();
        TrigPoly::new(m, [(freq, Complex64::new(1.0, 0.0))]).expect("valid character")
    }

    pub fn m(&self) -> usize {
        self.m
    }

    pub fn terms(&self) -> &[Term] {
        &self.terms
    }

    #[inline]
    pub fn eval(&self, x: &[f64]) -> Complex64 {
        let mut acc = Complex64::default();
        for t in &self.terms {
            let phase: f64 = t.freq.iter().zip(x).map(|(&n, &xi)| n as f64 * xi).sum();
            acc += t.amp * e(phase);
        }
        acc
    }

    /// The zero Fourier coefficient.
    pub fn mean(&self) -> Complex64 {
        self.terms
            .iter()
            .find(|t| t.freq.iter().all(|&n| n == 0))
            .map_or(Complex64::default(), |t| t.amp)
    }

    pub fn is_constant(&self) -> bool {
        self.terms.iter().all(|t| t.freq.iter().all(|&n| n == 0))
    }

    /// `sum |c_n|`, an upper bound for the sup norm.
    pub fn l1(&self) -> f64 {
        self.terms.iter().map(|t| t.amp.norm()).sum()
    }

    /// `(sum |c_n|^2)^(1/2)`.
    pub fn l2(&self) -> f64 {
        self.terms.iter().map(|t| t.amp.norm_sqr()).sum::<f64>().sqrt()
    }

    /// `x -> f(x + h)`.
    pub fn shift(&self, h: &[f64]) -> TrigPoly {
        let terms = self.terms.iter().map(|t| {
            let phase: f64 = t.freq.iter().zip(h).map(|(&n, &hi)| n as f64 * hi).sum();
            (t.freq.clone(), t.amp * e(phase))
        });
        TrigPoly::new(self.m, terms).expect("same dimension")
    }

    pub fn conj(&self) -> TrigPoly {
        let terms = self
            .terms
            .iter()
            .map(|t| (t.freq.iter().map(|n| -n).collect(), t.amp.conj()));
        TrigPoly::new(self.m, terms).expect("same dimension")
    }

    pub fn mul(&self, o: &TrigPoly) -> TrigPoly {
        let terms = self.terms.iter().flat_map(|a| {
            o.terms.iter().map(move |b| {
                let f = a.freq.iter().zip(&b.freq).map(|(x, y)| x + y).collect();
                (f, a.amp * b.amp)
            })
        });
        TrigPoly::new(self.m, terms).expect("same dimension")
    }
}

/// Indicator of `prod_i [corner_i, corner_i + widths_i)` taken mod 1.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BoxIndicator {
    pub corner: Vec<f64>,
    pub widths: Vec<f64>,
}

/// A box whose edges are replaced by linear ramps of width `eta`; the ramps
/// are centered on the edges, so the integral is still the volume.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SmoothedBox {
    pub corner: Vec<f64>,
    pub widths: Vec<f64>,
    #[serde(default = "default_eta")]
    pub eta: f64,
}

fn default_eta() -> f64 {
    0.01
}

fn check_box(corner: &[f64], widths: &[f64]) -> Result<(), FlowError> {
    if corner.len() != widths.len() {
        return Err(FlowError::DimensionMismatch {
            what: "box widths",
            expected: corner.len(),
            found: widths.len(),
        });
    }
    if widths.iter().any(|w| !(0.0..=1.0).contains(w)) {
        return Err(FlowError::InvalidObservable("box widths must lie in [0, 1]".into()));
    }
    Ok(())
}

/// Position of `x` inside the arc `[c, c + w)`, measured from `c`.
#[inline]
fn offset(x: f64, c: f64) -> f64 {
    super::flow::frac(x - c)
}

impl BoxIndicator {
    pub fn new(corner: Vec<f64>, widths: Vec<f64>) -> Result<Self, FlowError> {
        check_box(&corner, &widths)?;
        Ok(BoxIndicator { corner, widths })
    }

    #[inline]
    pub fn eval(&self, x: &[f64]) -> f64 {
        let inside = x
            .iter()
            .zip(&self.corner)
            .zip(&self.widths)
            .all(|((&xi, &c), &w)| w >= 1.0 || offset(xi, c) < w);
        if inside {
            1.0
        } else {
            0.0
        }
    }

    pub fn volume(&self) -> f64 {
        self.widths.iter().product()
    }
}

impl SmoothedBox {
    pub fn new(corner: Vec<f64>, widths: Vec<f64>, eta: f64) -> Result<Self, FlowError> {
        check_box(&corner, &widths)?;
        if !(eta > 0.0) || widths.iter().any(|&w| eta > w.min(1.0 - w) && w < 1.0) {
            return Err(FlowError::InvalidObservable(
                "eta must be positive and at most min(w, 1 - w)".into(),
            ));
        }
        Ok(SmoothedBox { corner, widths, eta })
    }

    #[inline]
    pub fn eval(&self, x: &[f64]) -> f64 {
        let mut v = 1.0;
        for ((&xi, &c), &w) in x.iter().zip(&self.corner).zip(&self.widths) {
            if w >= 1.0 {
                continue;
            }
            let u = offset(xi, c);
            let d = if u < w {
                u.min(w - u)
            } else {
                -(u - w).min(1.0 - u)
            };
            v *= (0.5 + d / self.eta).clamp(0.0, 1.0);
            if v == 0.0 {
                break;
            }
        }
        v
    }

    pub fn volume(&self) -> f64 {
        self.widths.iter().product()
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "type", rename_all = "snake_case")]
pub enum Observable {
    TrigPoly(TrigPoly),
    Box(BoxIndicator),
    SmoothedBox(SmoothedBox),
}

impl Observable {
    pub fn dim(&self) -> usize {
        match self {
            Observable::TrigPoly(p) => p.m(),
            Observable::Box(b) => b.corner.len(),
            Observable::SmoothedBox(b) => b.corner.len(),
        }
    }

    /// Re-runs the constructor checks, for values that came from serde.
    pub fn validate(&self) -> Result<(), FlowError> {
        match self {
            Observable::TrigPoly(_) => Ok(()),
            Observable::Box(b) => check_box(&b.corner, &b.widths),
            Observable::SmoothedBox(b) => {
                SmoothedBox::new(b.corner.clone(), b.widths.clone(), b.eta).map(|_| ())
            }
        }
    }

    #[inline]
    pub fn eval(&self, x: &[f64]) -> Complex64 {
        match self {
            Observable::TrigPoly(p) => p.eval(x),
            Observable::Box(b) => Complex64::new(b.eval(x), 0.0),
            Observable::SmoothedBox(b) => Complex64::new(b.eval(x), 0.0),
        }
    }

    /// The integral over the torus, in closed form.
    pub fn integral(&self) -> Complex64 {
        match self {
            Observable::TrigPoly(p) => p.mean(),
            Observable::Box(b) => Complex64::new(b.volume(), 0.0),
            Observable::SmoothedBox(b) => Complex64::new(b.volume(), 0.0),
        }
    }

    /// An upper bound for the sup norm.
    pub fn sup_bound(&self) -> f64 {
        match self {
            Observable::TrigPoly(p) => p.l1(),
            _ => 1.0,
        }
    }

    pub fn as_trig(&self) -> Option<&TrigPoly> {
        match self {
            Observable::TrigPoly(p) => Some(p),
            _ => None,
        }
    }

    /// The value of a constant observable.
    pub fn constant_value(&self) -> Option<Complex64> {
        match self {
            Observable::TrigPoly(p) if p.is_constant() => Some(p.mean()),
            Observable::Box(b) if b.widths.iter().all(|&w| w >= 1.0) => Some(Complex64::new(1.0, 0.0)),
            _ => None,
        }
    }
}

impl From<TrigPoly> for Observable {
    fn from(p: TrigPoly) -> Self {
        Observable::TrigPoly(p)
    }
}

/// `prod_j integral(f_j)`.
pub fn product_of_integrals(fs: &[Observable]) -> Complex64 {
    fs.iter().map(Observable::integral).product()
}

#[cfg(test)]
mod tests {
    use super::*;

    fn c(re: f64) -> Complex64 {
        Complex64::new(re, 0.0)
    }

    #[test]
    fn products_of_integrals() {
        let ch = Observable::from(TrigPoly::character(vec![1]));
        assert_eq!(product_of_integrals(&[ch.clone(), ch]), c(0.0));
        let f = TrigPoly::new(1, [(vec![0], c(1.0)), (vec![1], c(0.5))]).unwrap();
        let one = TrigPoly::constant(1, c(1.0));
        assert_eq!(product_of_integrals(&[f.into(), one.into()]), c(1.0));
        let a = BoxIndicator::new(vec![0.1], vec![0.3]).unwrap();
        let b = BoxIndicator::new(vec![0.6], vec![0.4]).unwrap();
        let p = product_of_integrals(&[Observable::Box(a), Observable::Box(b)]);
        assert!((p.re - 0.12).abs() < 1e-15 && p.im == 0.0);
    }

    #[test]
    fn boxes_wrap_around() {
        let b = BoxIndicator::new(vec![0.9], vec![0.2]).unwrap();
        assert_eq!(b.eval(&[0.95]), 1.0);
        assert_eq!(b.eval(&[0.05]), 1.0);
        assert_eq!(b.eval(&[0.15]), 0.0);
    }

    #[test]
    fn smoothed_box_integrates_to_volume() {
        let b = SmoothedBox::new(vec![0.8], vec![0.3], 0.05).unwrap();
        let n = 100_000;
        let s: f64 = (0..n).map(|i| b.eval(&[(i as f64 + 0.5) / n as f64])).sum();
        assert!((s / n as f64 - 0.3).abs() < 1e-9);
        assert_eq!(b.eval(&[0.95]), 1.0);
        assert_eq!(b.eval(&[0.8]), 0.5);
        assert!(SmoothedBox::new(vec![0.0], vec![0.02], 0.05).is_err());
    }

    #[test]
    fn trig_algebra() {
        let f = TrigPoly::new(1, [(vec![1], c(1.0)), (vec![-2], Complex64::new(0.0, 0.5))]).unwrap();
        let x = [0.37];
        let g = f.mul(&f.conj());
        assert!((g.eval(&x) - f.eval(&x).norm_sqr()).norm() < 1e-12);
        assert!((g.mean().re - 1.25).abs() < 1e-15);
        let h = f.shift(&[0.1]);
        assert!((h.eval(&x) - f.eval(&[0.47])).norm() < 1e-12);
    }

    #[test]
    fn serde_round_trip() {
        let f: Observable = TrigPoly::new(2, [(vec![1, 0], c(0.5))]).unwrap().into();
        let s = serde_json::to_string(&f).unwrap();
        assert_eq!(serde_json::from_str::<Observable>(&s).unwrap(), f);
        let bad = r#"{"type":"trig_poly","m":1,"terms":[{"freq":[1,2],"amp":[1,0]}]}"#;
        assert!(serde_json::from_str::<Observable>(bad).is_err());
    }
}
