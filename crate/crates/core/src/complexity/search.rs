use crate::polyfam::decompose::linear_matrix;
use crate::polyfam::linalg::{self, Matrix};
use crate::polyfam::{
    change_of_variables, independent_decomposition, is_nice, r_independent, weight_vector, Coeff,
    CoefficientMatrix, PolyError, PolyFamily, RatFunc, Rational,
};

use super::{
    lambda1, distinct_value_bound, ComplexityCertificate, FamilyComplexityReport, Rule, SearchOptions,
    Source, Substitution,
};

/// Candidates evaluated between early-exit checks.
const BATCH: usize = 256;
/// The pattern stage enumerates set partitions; skip it for larger families.
const REFINE_MAX_K: usize = 10;

struct Linearized {
    input: PolyFamily,
    decomposition: CoefficientMatrix,
    lin: PolyFamily,
    a: Matrix<Coeff>,
}

impl Linearized {
    fn new(fam: &PolyFamily) -> Result<Self, PolyError> {
        if !is_nice(fam) {
            return Err(PolyError::NotNice);
        }
        let decomposition = independent_decomposition(fam)?;
        let lin = decomposition.linear_family();
        let a = decomposition.alpha.clone();
        Ok(Linearized {
            input: fam.clone(),
            decomposition,
            lin,
            a,
        })
    }

    fn k(&self) -> usize {
        self.a.len()
    }

    fn l(&self) -> usize {
        self.lin.nvars()
    }

    fn has_tau(&self) -> bool {
        self.a.iter().flatten().any(|c| !c.is_rational())
    }
}

fn dot(row: &[Coeff], x: &[Coeff]) -> Coeff {
    let mut acc = Coeff::zero();
    for (a, b) in row.iter().zip(x) {
        if !a.is_zero() && !b.is_zero() {
            acc = &acc + &(a * b);
        }
    }
    acc
}

fn values(a: &Matrix<Coeff>, gamma: &[Coeff]) -> Vec<Coeff> {
    a.iter().map(|r| dot(r, gamma)).collect()
}

/// 0 when `p_j` is outside the span of the others (then some `gamma` kills
/// every other member), else 1.
fn lower_bound(a: &Matrix<Coeff>, j: usize) -> usize {
    let others: Matrix<Coeff> = a
        .iter()
        .enumerate()
        .filter(|&(i, _)| i != j)
        .map(|(_, r)| r.clone())
        .collect();
    if linalg::rank(a) > linalg::rank(&others) {
        0
    } else {
        1
    }
}

/// Lexicographic enumeration of `set^l`, first coordinate most significant.
struct Odometer {
    set: Vec<Coeff>,
    idx: Vec<usize>,
    done: bool,
}

impl Odometer {
    fn new(set: Vec<Coeff>, l: usize) -> Self {
        Odometer {
            done: set.is_empty() || l == 0,
            set,
            idx: vec![0; l],
        }
    }
}

impl Iterator for Odometer {
    type Item = Vec<Coeff>;

    fn next(&mut self) -> Option<Vec<Coeff>> {
        if self.done {
            return None;
        }
        let out = self.idx.iter().map(|&i| self.set[i].clone()).collect();
        let mut p = self.idx.len();
        loop {
            if p == 0 {
                self.done = true;
                break;
            }
            p -= 1;
            self.idx[p] += 1;
            if self.idx[p] < self.set.len() {
                break;
            }
            self.idx[p] = 0;
        }
        Some(out)
    }
}

fn ints(range: std::ops::RangeInclusive<i64>) -> Vec<Coeff> {
    range.map(Coeff::from_int).collect()
}

/// Grid stages: `{-1,0,1}^l`, `{-2..2}^l`, then entries
/// `{0, +-1, +-2, +-1/2} * tau^e` (`e` in `{-1,0,1}` when the family
/// involves tau). Vectors already produced by an earlier stage and the zero
/// vector are skipped.
fn candidates(l: usize, with_tau: bool) -> impl Iterator<Item = Vec<Coeff>> {
    let s1 = ints(-1..=1);
    let s2 = ints(-2..=2);
    let exps: &[i32] = if with_tau { &[-1, 0, 1] } else { &[0] };
    let mut s3 = vec![Coeff::zero()];
    for &e in exps {
        for r in [
            Rational::from_integer(1.into()),
            Rational::from_integer(2.into()),
            Rational::new(1.into(), 2.into()),
        ] {
            s3.push(Coeff::monomial(r.clone(), e));
            s3.push(Coeff::monomial(-r, e));
        }
    }
    s3.sort_by(|a, b| a.to_f64().total_cmp(&b.to_f64()));
    let stages = vec![s1, s2, s3];
    let prev: Vec<Vec<Coeff>> = vec![Vec::new(), stages[0].clone(), stages[1].clone()];
    stages
        .into_iter()
        .zip(prev)
        .flat_map(move |(set, earlier)| {
            Odometer::new(set, l).filter(move |g| {
                g.iter().any(|c| !c.is_zero())
                    && (earlier.is_empty() || !g.iter().all(|c| earlier.contains(c)))
            })
        })
}

#[derive(Clone)]
struct Found {
    bound: usize,
    gamma: Vec<Coeff>,
    source: Source,
}

fn grid_search(
    lz: &Linearized,
    targets: &[usize],
    lbs: &[usize],
    opts: &SearchOptions,
) -> (Vec<Option<Found>>, usize) {
    let k = lz.k();
    let mut best: Vec<Option<Found>> = vec![None; k];
    let mut iter = candidates(lz.l(), lz.has_tau()).take(opts.budget);
    let mut examined = 0;
    loop {
        let batch: Vec<Vec<Coeff>> = iter.by_ref().take(BATCH).collect();
        if batch.is_empty() {
            break;
        }
        let evals = opts.execution.map_slice(&batch, |g| values(&lz.a, g));
        for (g, v) in batch.iter().zip(&evals) {
            for &j in targets {
                if let Some(b) = distinct_value_bound(v, j) {
                    if best[j].as_ref().is_none_or(|f| b < f.bound) {
                        best[j] = Some(Found {
                            bound: b,
                            gamma: g.clone(),
                            source: Source::Grid,
                        });
                    }
                }
            }
        }
        examined += batch.len();
        if targets
            .iter()
            .all(|&j| best[j].as_ref().is_some_and(|f| f.bound <= lbs[j]))
        {
            break;
        }
    }
    (best, examined)
}

fn sub_rows(a: &[Coeff], b: &[Coeff]) -> Vec<Coeff> {
    a.iter().zip(b).map(|(x, y)| x - y).collect()
}

fn dot_rf(row: &[Coeff], v: &[RatFunc]) -> RatFunc {
    let mut acc = RatFunc::zero();
    for (a, b) in row.iter().zip(v) {
        if !a.is_zero() && !b.is_zero() {
            acc = &acc + &(&RatFunc::from(a) * b);
        }
    }
    acc
}

/// Tests one equality pattern: `labels[i] == 0` forces `p_i(gamma) = 0`,
/// equal positive labels force equal values, `j` stands alone. Returns a
/// `gamma` realizing the pattern generically.
fn realize(a: &Matrix<Coeff>, j: usize, labels: &[usize]) -> Option<Vec<Coeff>> {
    let k = a.len();
    let l = a[0].len();
    let mut rows: Matrix<Coeff> = Vec::new();
    let mut first: Vec<Option<usize>> = vec![None; k + 1];
    for i in (0..k).filter(|&i| i != j) {
        let lab = labels[i];
        if lab == 0 {
            rows.push(a[i].clone());
        } else if let Some(f) = first[lab] {
            rows.push(sub_rows(&a[i], &a[f]));
        } else {
            first[lab] = Some(i);
        }
    }
    let kernel = if rows.is_empty() {
        (0..l)
            .map(|c| {
                (0..l)
                    .map(|r| if r == c { RatFunc::one() } else { RatFunc::zero() })
                    .collect()
            })
            .collect()
    } else {
        linalg::nullspace(&linalg::to_ratfunc(&rows), l)
    };
    if kernel.is_empty() {
        return None;
    }
    let mut functionals = vec![a[j].clone()];
    functionals.extend((0..k).filter(|&i| i != j).map(|i| sub_rows(&a[i], &a[j])));
    for phi in &functionals {
        if kernel.iter().all(|kv| dot_rf(phi, kv).is_zero()) {
            return None;
        }
    }
    // Points on the moment curve sum_t n^t kappa_t avoid each of the finitely
    // many bad hyperplanes for all but finitely many n.
    for n in 1..=(k * l + 2) as i64 {
        let mut g = vec![RatFunc::zero(); l];
        let mut w = RatFunc::one();
        let step = RatFunc::from(Coeff::from_int(n));
        for kv in &kernel {
            for (gi, ki) in g.iter_mut().zip(kv) {
                *gi = &*gi + &(&w * ki);
            }
            w = &w * &step;
        }
        let gamma = linalg::clear_denominators(&g);
        if distinct_value_bound(&values(a, &gamma), j).is_some() {
            return Some(gamma);
        }
    }
    None
}

/// Assigns each non-target index a label in `0..=blocks` (0 = zero block)
/// with block labels in restricted-growth order, calling `f` on every
/// assignment that uses all `blocks` value blocks.
fn for_each_pattern(
    k: usize,
    j: usize,
    blocks: usize,
    f: &mut dyn FnMut(&[usize]) -> bool,
) -> bool {
    fn rec(
        pos: usize,
        k: usize,
        j: usize,
        blocks: usize,
        used: usize,
        labels: &mut Vec<usize>,
        f: &mut dyn FnMut(&[usize]) -> bool,
    ) -> bool {
        if pos == k {
            return used == blocks && f(labels);
        }
        if pos == j {
            return rec(pos + 1, k, j, blocks, used, labels, f);
        }
        let remaining = (pos..k).filter(|&i| i != j).count();
        if used + remaining < blocks {
            return false;
        }
        for lab in 0..=(used + 1).min(blocks) {
            labels[pos] = lab;
            let u = used.max(lab);
            if rec(pos + 1, k, j, blocks, u, labels, f) {
                return true;
            }
        }
        false
    }
    let mut labels = vec![0; k];
    rec(0, k, j, blocks, 0, &mut labels, f)
}

/// Smallest achievable `|Lambda_1| - 1` below `better_than`, searched over
/// equality patterns with an increasing number of value blocks.
fn refine(a: &Matrix<Coeff>, j: usize, lb: usize, better_than: Option<usize>) -> Option<Found> {
    let k = a.len();
    let max_bound = better_than.map_or(k - 1, |b| b.saturating_sub(1));
    if better_than == Some(0) {
        return None;
    }
    for bound in lb..=max_bound {
        // `bound + 1` value blocks; one of them is `{j}`.
        let mut hit = None;
        for_each_pattern(k, j, bound, &mut |labels| {
            hit = realize(a, j, labels);
            hit.is_some()
        });
        if let Some(gamma) = hit {
            let b = distinct_value_bound(&values(a, &gamma), j).expect("realized pattern is valid");
            return Some(Found {
                bound: b,
                gamma,
                source: Source::Refinement,
            });
        }
    }
    None
}

/// `B` with `gamma` as first column, completed greedily by standard basis
/// columns.
fn complete_basis(gamma: &[Coeff]) -> Matrix<Coeff> {
    let l = gamma.len();
    let mut cols: Vec<Vec<Coeff>> = vec![gamma.to_vec()];
    for m in 0..l {
        if cols.len() == l {
            break;
        }
        let mut e = vec![Coeff::zero(); l];
        e[m] = Coeff::one();
        cols.push(e);
        if linalg::rank(&cols) < cols.len() {
            cols.pop();
        }
    }
    linalg::transpose(&cols)
}

fn lambda1_before(a: &Matrix<Coeff>, j: usize) -> Option<usize> {
    (0..a[0].len())
        .filter_map(|c| {
            let col: Vec<Coeff> = a.iter().map(|r| r[c].clone()).collect();
            distinct_value_bound(&col, j).map(|b| b + 1)
        })
        .min()
}

fn certificate(lz: &Linearized, j: usize, found: Option<Found>) -> Result<ComplexityCertificate, PolyError> {
    let k = lz.k();
    let base = ComplexityCertificate {
        j,
        bound: k - 1,
        rule: Rule::GenericCap,
        substitutions: Vec::new(),
        family: lz.input.to_string(),
        linearization: lz.lin.to_string(),
        target: lz.lin.get(j).to_string(),
        resulting_family: lz.lin.to_string(),
        lambda1_before: lambda1_before(&lz.a, j),
        lambda1_after: None,
        source: Source::Fallback,
        fallback: true,
    };
    let Some(found) = found else {
        return Ok(base);
    };
    let b = complete_basis(&found.gamma);
    let det = linalg::det(&b);
    let result = change_of_variables(&lz.lin, &b)?;
    let col: Vec<Coeff> = linear_matrix(&result)?.iter().map(|r| r[0].clone()).collect();
    let after = lambda1(&col);
    debug_assert_eq!(after - 1, found.bound);
    Ok(ComplexityCertificate {
        bound: found.bound,
        rule: Rule::DistinctValues,
        substitutions: vec![Substitution {
            gamma: found.gamma,
            b,
            det,
        }],
        resulting_family: result.to_string(),
        lambda1_after: Some(after),
        source: found.source,
        fallback: false,
        ..base
    })
}

fn independent_certificate(lz: &Linearized, j: usize) -> ComplexityCertificate {
    ComplexityCertificate {
        j,
        bound: 0,
        rule: Rule::Independent,
        substitutions: Vec::new(),
        family: lz.input.to_string(),
        linearization: lz.lin.to_string(),
        target: lz.lin.get(j).to_string(),
        resulting_family: lz.lin.to_string(),
        lambda1_before: lambda1_before(&lz.a, j),
        lambda1_after: None,
        source: Source::Independent,
        fallback: false,
    }
}

fn search(
    lz: &Linearized,
    targets: &[usize],
    opts: &SearchOptions,
) -> Result<(Vec<ComplexityCertificate>, usize), PolyError> {
    if r_independent(&lz.input).independent {
        return Ok((
            targets.iter().map(|&j| independent_certificate(lz, j)).collect(),
            0,
        ));
    }
    let k = lz.k();
    let lbs: Vec<usize> = (0..k).map(|j| lower_bound(&lz.a, j)).collect();
    let (grid, examined) = grid_search(lz, targets, &lbs, opts);
    let refine_on = opts.refine && k <= REFINE_MAX_K;
    let found: Vec<Option<Found>> = opts.execution.map_slice(targets, |&j| {
        let g = grid[j].clone();
        if !refine_on || g.as_ref().is_some_and(|f| f.bound <= lbs[j]) {
            return g;
        }
        refine(&lz.a, j, lbs[j], g.as_ref().map(|f| f.bound)).or(g)
    });
    let certs = targets
        .iter()
        .zip(found)
        .map(|(&j, f)| certificate(lz, j, f))
        .collect::<Result<Vec<_>, _>>()?;
    Ok((certs, examined))
}

/// Certified bound for a single member.
pub fn pj_bound_search(
    fam: &PolyFamily,
    j: usize,
    opts: &SearchOptions,
) -> Result<ComplexityCertificate, PolyError> {
    let lz = Linearized::new(fam)?;
    if j >= lz.k() {
        return Err(PolyError::DimensionMismatch {
            expected: lz.k(),
            found: j + 1,
        });
    }
    Ok(search(&lz, &[j], opts)?.0.remove(0))
}

/// Per-member certificates and the family bound (their maximum).
pub fn family_complexity_bounds(
    fam: &PolyFamily,
    opts: &SearchOptions,
) -> Result<FamilyComplexityReport, PolyError> {
    let lz = Linearized::new(fam)?;
    let k = lz.k();
    let targets: Vec<usize> = (0..k).collect();
    let (per_j, examined) = search(&lz, &targets, opts)?;
    let family_bound = per_j.iter().map(|c| c.bound).max().unwrap_or(0).min(k - 1);
    let ind = r_independent(fam);
    Ok(FamilyComplexityReport {
        family: fam.clone(),
        linearization: lz.lin.clone(),
        basis: lz.decomposition.basis.clone(),
        basis_kind: lz.decomposition.basis_kind,
        coefficient_matrix: lz.a.clone(),
        independent: ind.independent,
        dependence_witness: ind.witness,
        weight_vector: weight_vector(fam)?,
        nonzero_constant_terms: fam.nonzero_constants().iter().map(|i| i + 1).collect(),
        per_j,
        family_bound,
        exact: family_bound == 0,
        candidates_examined: examined,
        budget: opts.budget,
    })
}
