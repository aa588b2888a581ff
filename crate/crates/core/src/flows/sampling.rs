//! Sample points in `[0,R_1] x ... x [0,R_d]` and chunked reductions over
//! them. Random streams are keyed by `(seed, chunk index)`, so results do not
//! depend on the execution mode.

use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use super::FlowError;
use crate::exec::Execution;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Scheme {
    /// Midpoints of a regular grid.
    Grid,
    MonteCarlo,
    /// Additive recurrence with generalized golden ratio steps and a seeded
    /// random shift.
    LowDiscrepancy,
}

impl std::str::FromStr for Scheme {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, String> {
        match s {
            "grid" => Ok(Scheme::Grid),
            "monte-carlo" | "mc" => Ok(Scheme::MonteCarlo),
            "low-discrepancy" | "qmc" => Ok(Scheme::LowDiscrepancy),
            _ => Err(format!("unknown scheme '{s}'")),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SamplingPlan {
    #[serde(rename = "R")]
    pub r: Vec<f64>,
    pub scheme: Scheme,
    /// Total sample count; for grids, `samples^(1/d)` points per axis unless
    /// `per_axis` is set.
    pub samples: usize,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub per_axis: Option<Vec<usize>>,
    pub seed: u64,
    #[serde(skip)]
    pub execution: Execution,
}

/// Running sums for a complex-valued sample mean.
#[derive(Debug, Clone, Copy, Default, PartialEq)]
pub struct Moments {
    pub n: usize,
    pub sum: Complex64,
    pub sum_sq: f64,
}

impl Moments {
    #[inline]
    pub fn push(&mut self, v: Complex64) {
        self.n += 1;
        self.sum += v;
        self.sum_sq += v.norm_sqr();
    }

    pub fn merge(mut self, o: &Moments) -> Moments {
        self.n += o.n;
        self.sum += o.sum;
        self.sum_sq += o.sum_sq;
        self
    }

    pub fn mean(&self) -> Complex64 {
        if self.n == 0 {
            Complex64::default()
        } else {
            self.sum / self.n as f64
        }
    }

    /// Standard error of the mean.
    pub fn stderr(&self) -> f64 {
        if self.n < 2 {
            return 0.0;
        }
        let n = self.n as f64;
        let var = (self.sum_sq - self.sum.norm_sqr() / n) / (n - 1.0);
        (var.max(0.0) / n).sqrt()
    }
}

/// Generalized golden ratio: the positive root of `x^(d+1) = x + 1`.
fn phi(d: usize) -> f64 {
    let mut x = 2.0f64;
    for _ in 0..64 {
        x = (1.0 + x).powf(1.0 / (d as f64 + 1.0));
    }
    x
}

impl SamplingPlan {
    pub fn new(r: Vec<f64>, scheme: Scheme, samples: usize, seed: u64) -> Self {
        SamplingPlan {
            r,
            scheme,
            samples,
            per_axis: None,
            seed,
            execution: Execution::default(),
        }
    }

    pub fn monte_carlo(r: Vec<f64>, samples: usize, seed: u64) -> Self {
        SamplingPlan::new(r, Scheme::MonteCarlo, samples, seed)
    }

    pub fn with_execution(mut self, execution: Execution) -> Self {
        self.execution = execution;
        self
    }

    pub fn with_per_axis(mut self, per_axis: Vec<usize>) -> Self {
        self.per_axis = Some(per_axis);
        self
    }

    pub fn d(&self) -> usize {
        self.r.len()
    }

    pub fn validate(&self) -> Result<(), FlowError> {
        if self.r.is_empty() {
            return Err(FlowError::InvalidPlan("R must have at least one entry".into()));
        }
        if self.r.iter().any(|&r| !(r.is_finite() && r > 0.0)) {
            return Err(FlowError::InvalidPlan("every R_i must be positive".into()));
        }
        if let Some(p) = &self.per_axis {
            if p.len() != self.d() {
                return Err(FlowError::DimensionMismatch {
                    what: "per-axis counts",
                    expected: self.d(),
                    found: p.len(),
                });
            }
            if p.contains(&0) {
                return Err(FlowError::InvalidPlan("per-axis counts must be positive".into()));
            }
        } else if self.samples == 0 {
            return Err(FlowError::InvalidPlan("samples must be positive".into()));
        }
        Ok(())
    }

    /// Grid points per axis.
    pub fn grid_axes(&self) -> Vec<usize> {
        if let Some(p) = &self.per_axis {
            return p.clone();
        }
        let d = self.d();
        let mut n = (self.samples as f64).powf(1.0 / d as f64).round().max(1.0) as usize;
        while n > 1 && n.pow(d as u32) > self.samples {
            n -= 1;
        }
        vec![n; d]
    }

    /// Number of points actually used.
    pub fn count(&self) -> usize {
        match self.scheme {
            Scheme::Grid => self.grid_axes().iter().product(),
            _ => self.samples,
        }
    }

    fn chunk_rng(&self, chunk: usize) -> ChaCha8Rng {
        let mut rng = ChaCha8Rng::seed_from_u64(self.seed);
        rng.set_stream(chunk as u64);
        rng
    }

    /// Runs `f` over every sample point, one accumulator per chunk, and
    /// returns the accumulators in chunk order.
    pub fn fold<A, I, F>(&self, init: I, f: F) -> Vec<A>
    where
        A: Send,
        I: Fn() -> A + Sync + Send,
        F: Fn(&mut A, &[f64]) + Sync + Send,
    {
        let d = self.d();
        let n = self.count();
        match self.scheme {
            Scheme::Grid => {
                let axes = self.grid_axes();
                self.execution.map_chunks(n, |_, range| {
                    let mut acc = init();
                    let mut s = vec![0.0; d];
                    for i in range {
                        let mut rest = i;
                        for a in 0..d {
                            let k = rest % axes[a];
                            rest /= axes[a];
                            s[a] = (k as f64 + 0.5) * self.r[a] / axes[a] as f64;
                        }
                        f(&mut acc, &s);
                    }
                    acc
                })
            }
            Scheme::MonteCarlo => self.execution.map_chunks(n, |c, range| {
                let mut acc = init();
                let mut rng = self.chunk_rng(c);
                let mut s = vec![0.0; d];
                for _ in range {
                    for (x, &r) in s.iter_mut().zip(&self.r) {
                        *x = r * rng.random::<f64>();
                    }
                    f(&mut acc, &s);
                }
                acc
            }),
            Scheme::LowDiscrepancy => {
                let g = phi(d);
                let alpha: Vec<f64> = (1..=d).map(|a| g.powi(-(a as i32)).fract()).collect();
                let mut rng = self.chunk_rng(usize::MAX);
                let shift: Vec<f64> = (0..d).map(|_| rng.random::<f64>()).collect();
                self.execution.map_chunks(n, |_, range| {
                    let mut acc = init();
                    let mut s = vec![0.0; d];
                    for i in range {
                        let k = (i + 1) as f64;
                        for a in 0..d {
                            s[a] = self.r[a] * super::flow::frac(shift[a] + k * alpha[a]);
                        }
                        f(&mut acc, &s);
                    }
                    acc
                })
            }
        }
    }

    /// Mean and moments of a complex integrand.
    pub fn moments<F>(&self, f: F) -> Moments
    where
        F: Fn(&[f64]) -> Complex64 + Sync + Send,
    {
        self.fold(Moments::default, |m, s| m.push(f(s)))
            .iter()
            .fold(Moments::default(), |a, b| a.merge(b))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn grid_counts_and_nodes() {
        let p = SamplingPlan::new(vec![1.0, 2.0], Scheme::Grid, 100, 0);
        assert_eq!(p.grid_axes(), vec![10, 10]);
        let pts = p.fold(Vec::new, |v, s| v.push(s.to_vec())).concat();
        assert_eq!(pts.len(), 100);
        assert_eq!(pts[0], vec![0.05, 0.1]);
        let p = SamplingPlan::new(vec![1.0; 3], Scheme::Grid, 30, 0);
        assert_eq!(p.count(), 27);
    }

    #[test]
    fn samples_stay_in_range_and_are_seeded() {
        for scheme in [Scheme::MonteCarlo, Scheme::LowDiscrepancy] {
            let p = SamplingPlan::new(vec![3.0, 0.5], scheme, 10_000, 7);
            let pts = p.fold(Vec::new, |v, s| v.push(s.to_vec())).concat();
            assert_eq!(pts.len(), 10_000);
            assert!(pts.iter().all(|s| (0.0..3.0).contains(&s[0]) && (0.0..0.5).contains(&s[1])));
            let again = p.fold(Vec::new, |v, s| v.push(s.to_vec())).concat();
            assert_eq!(pts, again);
            let other = SamplingPlan { seed: 8, ..p }.fold(Vec::new, |v, s| v.push(s.to_vec()));
            assert_ne!(pts, other.concat());
        }
    }

    #[test]
    fn execution_modes_agree() {
        let f = |s: &[f64]| Complex64::new(s[0].sin(), s[0].cos());
        for scheme in [Scheme::Grid, Scheme::MonteCarlo, Scheme::LowDiscrepancy] {
            let p = SamplingPlan::new(vec![10.0], scheme, 20_000, 3);
            let a = p.clone().with_execution(Execution::Sequential).moments(f);
            let b = p.with_execution(Execution::Parallel).moments(f);
            assert_eq!(a, b);
        }
    }

    #[test]
    fn low_discrepancy_integrates_well() {
        let p = SamplingPlan::new(vec![1.0, 1.0], Scheme::LowDiscrepancy, 50_000, 1);
        let m = p.moments(|s| Complex64::new(s[0] * s[1], 0.0));
        assert!((m.mean().re - 0.25).abs() < 1e-3);
    }
}
