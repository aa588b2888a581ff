//! Box-count discrepancy of sampled paths on tori and the torus-factor
//! criterion on the Heisenberg nilmanifold.
//!
//! The box family is every anisotropic dyadic box
//! `prod_a [i_a / 2^{l_a}, (i_a + 1) / 2^{l_a})` with `0 <= l_a <= depth`.

use serde::Serialize;

use super::average::RealFamily;
use super::flow::{frac, integer_relation, Flow, HeisenbergFlow};
use super::sampling::SamplingPlan;
use super::FlowError;

pub const DEFAULT_DEPTH: u32 = 4;
pub const DEFAULT_BINS: usize = 16;
const MAX_CELLS: usize = 1 << 20;

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct DyadicBox {
    pub levels: Vec<u32>,
    pub index: Vec<usize>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct DiscrepancyReport {
    /// `max |empirical fraction - volume|` over the box family.
    pub discrepancy: f64,
    pub worst_box: DyadicBox,
    pub samples: usize,
    pub boxes: usize,
    pub depth: u32,
    /// A nonzero integer vector `n` with `n . (q - q(0))` identically zero,
    /// which rules out equidistribution of the path.
    pub rational_relation: Option<Vec<i64>>,
    pub degenerate: bool,
}

/// Coefficient bound for the relation search.
const RELATION_BOUND: i64 = 6;

/// Integer relations among the non-constant parts of a path.
fn path_relation(qs: &RealFamily) -> Option<Vec<i64>> {
    let mut monos: Vec<Vec<u32>> = qs
        .polys()
        .iter()
        .flat_map(|q| q.terms().map(|(e, _)| e.clone()))
        .filter(|e| e.iter().any(|&x| x > 0))
        .collect();
    monos.sort();
    monos.dedup();
    if monos.is_empty() {
        return Some(vec![1; qs.len()]);
    }
    let cols: Vec<Vec<f64>> = monos
        .iter()
        .map(|e| qs.polys().iter().map(|q| q.coeff(e).copied().unwrap_or(0.0)).collect())
        .collect();
    integer_relation(&cols, RELATION_BOUND)
}

fn cell_count(w: usize, depth: u32) -> Result<usize, FlowError> {
    (1usize << depth)
        .checked_pow(w as u32)
        .filter(|&c| c <= MAX_CELLS)
        .ok_or_else(|| FlowError::InvalidPlan(format!("{w} dimensions at depth {depth} exceed the cell budget")))
}

#[inline]
fn cell_index(y: &[f64], depth: u32) -> usize {
    let side = 1usize << depth;
    y.iter().rev().fold(0, |acc, &v| {
        let c = ((v * side as f64) as usize).min(side - 1);
        acc * side + c
    })
}

/// Discrepancy from a histogram over the finest dyadic cells, coordinate 0
/// varying fastest.
pub fn dyadic_discrepancy(hist: &[u64], w: usize, depth: u32) -> DiscrepancyReport {
    let side = 1usize << depth;
    let n: u64 = hist.iter().sum();
    let mut best = (0.0, DyadicBox { levels: vec![0; w], index: vec![0; w] });
    let mut boxes = 0;
    let mut levels = vec![0u32; w];
    loop {
        let per: Vec<usize> = levels.iter().map(|&l| 1usize << l).collect();
        let total: usize = per.iter().product();
        let mut counts = vec![0u64; total];
        for (cell, &c) in hist.iter().enumerate() {
            if c == 0 {
                continue;
            }
            let mut rest = cell;
            let mut idx = 0;
            let mut stride = 1;
            for a in 0..w {
                let coord = rest % side;
                rest /= side;
                idx += (coord >> (depth - levels[a])) * stride;
                stride *= per[a];
            }
            counts[idx] += c;
        }
        let volume = 1.0 / total as f64;
        for (i, &c) in counts.iter().enumerate() {
            let dev = if n == 0 { volume } else { (c as f64 / n as f64 - volume).abs() };
            if dev > best.0 {
                let mut rest = i;
                let index = per
                    .iter()
                    .map(|&p| {
                        let k = rest % p;
                        rest /= p;
                        k
                    })
                    .collect();
                best = (dev, DyadicBox { levels: levels.clone(), index });
            }
        }
        boxes += total;
        let mut a = 0;
        loop {
            if a == w {
                return DiscrepancyReport {
                    discrepancy: best.0,
                    worst_box: best.1,
                    samples: n as usize,
                    boxes,
                    depth,
                    rational_relation: None,
                    degenerate: false,
                };
            }
            if levels[a] < depth {
                levels[a] += 1;
                break;
            }
            levels[a] = 0;
            a += 1;
        }
    }
}

fn merge(parts: Vec<Vec<u64>>) -> Vec<u64> {
    let mut it = parts.into_iter();
    let mut out = it.next().unwrap_or_default();
    for p in it {
        for (a, b) in out.iter_mut().zip(p) {
            *a += b;
        }
    }
    out
}

/// Discrepancy of `s -> (q_1(s), ..., q_w(s)) mod 1` sampled by `plan`.
pub fn path_discrepancy(qs: &RealFamily, plan: &SamplingPlan, depth: u32) -> Result<DiscrepancyReport, FlowError> {
    plan.validate()?;
    if plan.d() != qs.nvars() {
        return Err(FlowError::DimensionMismatch {
            what: "plan dimension",
            expected: qs.nvars(),
            found: plan.d(),
        });
    }
    let w = qs.len();
    let cells = cell_count(w, depth)?;
    let parts = plan.fold(
        || (vec![0u64; cells], vec![0.0; w]),
        |(h, y), s| {
            for (v, q) in y.iter_mut().zip(qs.polys()) {
                *v = frac(q.eval_f64(s));
            }
            h[cell_index(y, depth)] += 1;
        },
    );
    let hist = merge(parts.into_iter().map(|p| p.0).collect());
    let mut rep = dyadic_discrepancy(&hist, w, depth);
    rep.rational_relation = path_relation(qs);
    rep.degenerate = rep.rational_relation.is_some();
    Ok(rep)
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct HeisenbergReport {
    /// Discrepancy of the projected path on the base torus.
    pub base_discrepancy: f64,
    /// Total variation distance of the binned z-coordinate from uniform.
    pub z_tv_distance: f64,
    pub bins: usize,
    /// `alpha` and `beta` look rationally dependent.
    pub non_ergodic: bool,
    /// The path is constant.
    pub degenerate: bool,
    pub samples: usize,
    pub depth: u32,
}

/// Samples `s -> a_{p(s)} x` and measures equidistribution of its base
/// projection and of its z-coordinate.
pub fn heisenberg_factor_check(
    flow: &HeisenbergFlow,
    p: &RealFamily,
    x: &[f64],
    plan: &SamplingPlan,
    bins: usize,
) -> Result<HeisenbergReport, FlowError> {
    plan.validate()?;
    if p.len() != 1 {
        return Err(FlowError::DimensionMismatch {
            what: "path polynomials",
            expected: 1,
            found: p.len(),
        });
    }
    if plan.d() != p.nvars() {
        return Err(FlowError::DimensionMismatch {
            what: "plan dimension",
            expected: p.nvars(),
            found: plan.d(),
        });
    }
    if x.len() != 3 {
        return Err(FlowError::DimensionMismatch {
            what: "point",
            expected: 3,
            found: x.len(),
        });
    }
    if bins == 0 {
        return Err(FlowError::InvalidPlan("bins must be positive".into()));
    }
    let depth = DEFAULT_DEPTH;
    let cells = cell_count(2, depth)?;
    let x = flow.reduce(x);
    let q = &p.polys()[0];
    let parts = plan.fold(
        || (vec![0u64; cells], vec![0u64; bins], vec![0.0; 3]),
        |(base, zs, y), s| {
            flow.apply_into(q.eval_f64(s), &x, y);
            base[cell_index(&y[..2], depth)] += 1;
            zs[((y[2] * bins as f64) as usize).min(bins - 1)] += 1;
        },
    );
    let mut base = vec![0u64; cells];
    let mut zs = vec![0u64; bins];
    for (b, z, _) in parts {
        base.iter_mut().zip(b).for_each(|(a, c)| *a += c);
        zs.iter_mut().zip(z).for_each(|(a, c)| *a += c);
    }
    let rep = dyadic_discrepancy(&base, 2, depth);
    let n = plan.count() as f64;
    let tv = 0.5 * zs.iter().map(|&c| (c as f64 / n - 1.0 / bins as f64).abs()).sum::<f64>();
    Ok(HeisenbergReport {
        base_discrepancy: rep.discrepancy,
        z_tv_distance: tv,
        bins,
        non_ergodic: !flow.base_is_ergodic(),
        degenerate: q.is_constant(),
        samples: rep.samples,
        depth,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::flows::sampling::Scheme;

    #[test]
    fn discrepancy_of_point_masses_and_uniform_grids() {
        // All mass in one finest cell of [0,1).
        let mut h = vec![0u64; 16];
        h[3] = 10;
        let r = dyadic_discrepancy(&h, 1, 4);
        assert!((r.discrepancy - 15.0 / 16.0).abs() < 1e-15);
        assert_eq!(r.boxes, 1 + 2 + 4 + 8 + 16);
        let r = dyadic_discrepancy(&vec![5u64; 256], 2, 4);
        assert!(r.discrepancy < 1e-15);
        assert_eq!(r.boxes, 31 * 31);
    }

    #[test]
    fn irrational_line_is_equidistributed() {
        let q = RealFamily::parse("sqrt2*s", None).unwrap();
        let plan = SamplingPlan::monte_carlo(vec![5000.0], 200_000, 0);
        assert!(path_discrepancy(&q, &plan, 4).unwrap().discrepancy <= 0.05);
    }

    #[test]
    fn rational_relations_are_flagged() {
        let plan = SamplingPlan::monte_carlo(vec![100.0], 1000, 0);
        let ok = RealFamily::parse("sqrt2*s, sqrt3*s^2", None).unwrap();
        assert!(!path_discrepancy(&ok, &plan, 4).unwrap().degenerate);
        let bad = RealFamily::parse("sqrt2*s, 2*sqrt2*s + s^2/2, s^2", None).unwrap();
        let r = path_discrepancy(&bad, &plan, 4).unwrap();
        assert!(r.degenerate);
        let n = r.rational_relation.unwrap();
        assert_eq!(n[0] + 2 * n[1], 0);
        assert_eq!(n[1] + 2 * n[2], 0);
        let flat = RealFamily::parse("s, 1", None).unwrap();
        assert!(path_discrepancy(&flat, &plan, 4).unwrap().degenerate);
    }

    #[test]
    fn integer_grid_sampling_aliases() {
        let q = RealFamily::parse("s", None).unwrap();
        let plan = SamplingPlan::new(vec![5000.0], Scheme::Grid, 5000, 0);
        assert!(path_discrepancy(&q, &plan, 4).unwrap().discrepancy > 0.9);
    }

    #[test]
    fn heisenberg_flags() {
        let p = RealFamily::parse("s", None).unwrap();
        let plan = SamplingPlan::monte_carlo(vec![500.0], 20_000, 0);
        let r = heisenberg_factor_check(&HeisenbergFlow::new(1.0, 1.0, 0.0), &p, &[0.0; 3], &plan, 16).unwrap();
        assert!(r.non_ergodic && !r.degenerate);
        let zero = RealFamily::parse("0", Some(1)).unwrap();
        let r = heisenberg_factor_check(&HeisenbergFlow::new(1.0, 2f64.sqrt(), 0.0), &zero, &[0.1, 0.2, 0.3], &plan, 16)
            .unwrap();
        assert!(r.degenerate && !r.non_ergodic);
        assert!(r.base_discrepancy > 0.9);
    }
}
