use std::collections::BTreeMap;

use flowcx_core::complexity::{complexity_zero, family_complexity_bounds, replay_certificate, SearchOptions};
use flowcx_core::polyfam::coeff::rat;
use flowcx_core::polyfam::decompose::{change_of_variables, independent_decomposition, r_independent};
use flowcx_core::polyfam::family::{equivalent, weight_less, weight_vector, WeightVector};
use flowcx_core::polyfam::linalg::{det, inverse_laurent, rank};
use flowcx_core::polyfam::{parse_poly, Coeff, MultiPoly, Poly, PolyFamily};
use proptest::prelude::*;

fn small_rational() -> impl Strategy<Value = flowcx_core::polyfam::Rational> {
    (-4i64..=4, 1i64..=3).prop_map(|(n, d)| rat(n, d))
}

fn coeff() -> impl Strategy<Value = Coeff> {
    prop::collection::vec((-1i32..=2, small_rational()), 1..=2).prop_map(Coeff::from_terms)
}

fn int_coeff() -> impl Strategy<Value = Coeff> {
    prop_oneof![3 => Just(Coeff::zero()), 4 => (-2i64..=2).prop_map(Coeff::from_int), 1 => coeff()]
}

fn exponent(nvars: usize, max_deg: u32) -> impl Strategy<Value = Vec<u32>> {
    prop::collection::vec(0..=max_deg, nvars).prop_filter("bounded degree", move |e| e.iter().sum::<u32>() <= max_deg)
}

fn poly(nvars: usize, max_deg: u32) -> impl Strategy<Value = MultiPoly> {
    prop::collection::vec((exponent(nvars, max_deg), coeff()), 0..=4).prop_map(move |ts| Poly::from_terms(nvars, ts))
}

fn nonconstant_poly(nvars: usize, max_deg: u32) -> impl Strategy<Value = MultiPoly> {
    poly(nvars, max_deg).prop_filter("non-constant", |p| !p.is_constant())
}

/// Linear family with rows drawn from small integers and tau monomials.
fn linear_rows(k: usize, l: usize) -> impl Strategy<Value = Vec<Vec<Coeff>>> {
    prop::collection::vec(prop::collection::vec(int_coeff(), l), k)
}

fn linear_family(rows: &[Vec<Coeff>]) -> PolyFamily {
    PolyFamily::new(rows.iter().map(|r| Poly::linear(r)).collect()).unwrap()
}

fn nice_rows(rows: &[Vec<Coeff>]) -> bool {
    rows.iter().all(|r| r.iter().any(|c| !c.is_zero()))
        && (0..rows.len()).all(|i| (i + 1..rows.len()).all(|j| rows[i] != rows[j]))
}

fn permutations(n: usize) -> Vec<Vec<usize>> {
    if n == 0 {
        return vec![vec![]];
    }
    let mut out = Vec::new();
    for p in permutations(n - 1) {
        for pos in 0..=p.len() {
            let mut q = p.clone();
            q.insert(pos, n - 1);
            out.push(q);
        }
    }
    out
}

fn parity(p: &[usize]) -> bool {
    let mut inv = 0;
    for i in 0..p.len() {
        for j in i + 1..p.len() {
            if p[i] > p[j] {
                inv += 1;
            }
        }
    }
    inv % 2 == 1
}

fn leibniz(m: &[Vec<Coeff>]) -> Coeff {
    let mut acc = Coeff::zero();
    for p in permutations(m.len()) {
        let mut term = Coeff::one();
        for (i, &j) in p.iter().enumerate() {
            term = term * &m[i][j];
        }
        acc = if parity(&p) { acc - term } else { acc + term };
    }
    acc
}

fn subsets(n: usize, r: usize) -> Vec<Vec<usize>> {
    (0u32..(1 << n))
        .filter(|m| m.count_ones() as usize == r)
        .map(|m| (0..n).filter(|i| m & (1 << i) != 0).collect())
        .collect()
}

/// Largest `r` with a nonzero `r x r` minor.
fn rank_by_minors(m: &[Vec<Coeff>]) -> usize {
    let (rows, cols) = (m.len(), m.first().map_or(0, Vec::len));
    for r in (1..=rows.min(cols)).rev() {
        for rs in subsets(rows, r) {
            for cs in subsets(cols, r) {
                let minor: Vec<Vec<Coeff>> = rs.iter().map(|&i| cs.iter().map(|&j| m[i][j].clone()).collect()).collect();
                if !leibniz(&minor).is_zero() {
                    return r;
                }
            }
        }
    }
    0
}

/// Class counts keyed by degree, grouping members by their top homogeneous part.
fn weight_by_leading_form(fam: &PolyFamily) -> Vec<usize> {
    let mut classes: BTreeMap<u32, Vec<Vec<(Vec<u32>, Coeff)>>> = BTreeMap::new();
    for p in fam.polys() {
        let d = p.degree().unwrap();
        let mut top: Vec<(Vec<u32>, Coeff)> = p
            .terms()
            .filter(|(e, _)| e.iter().sum::<u32>() == d)
            .map(|(e, c)| (e.clone(), c.clone()))
            .collect();
        top.sort_by(|a, b| a.0.cmp(&b.0));
        let slot = classes.entry(d).or_default();
        if !slot.contains(&top) {
            slot.push(top);
        }
    }
    let b = fam.degree() as usize;
    (1..=b).map(|d| classes.get(&(d as u32)).map_or(0, Vec::len)).collect()
}

fn weight() -> impl Strategy<Value = WeightVector> {
    prop::collection::vec(0usize..3, 1..=3).prop_map(WeightVector::new)
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(128))]

    #[test]
    fn printing_then_parsing_is_identity((nvars, p) in (1usize..=3).prop_flat_map(|n| (Just(n), poly(n, 3)))) {
        let text = p.to_string();
        let back = parse_poly(&text, nvars).unwrap();
        prop_assert_eq!(back, p, "{}", text);
    }

    #[test]
    fn equivalence_is_an_equivalence_relation(
        p in nonconstant_poly(2, 3),
        q in nonconstant_poly(2, 3),
        r in nonconstant_poly(2, 3),
    ) {
        prop_assert!(equivalent(&p, &p).unwrap());
        prop_assert_eq!(equivalent(&p, &q).unwrap(), equivalent(&q, &p).unwrap());
        if equivalent(&p, &q).unwrap() && equivalent(&q, &r).unwrap() {
            prop_assert!(equivalent(&p, &r).unwrap());
        }
    }

    #[test]
    fn equivalence_chains_within_one_degree(
        lead in nonconstant_poly(2, 2),
        lower in prop::collection::vec(poly(2, 1), 3),
    ) {
        // Shared top-degree part, different lower-order terms.
        let d = lead.degree().unwrap();
        prop_assume!(d == 2);
        let top = Poly::from_terms(2, lead.terms().filter(|(e, _)| e.iter().sum::<u32>() == 2).map(|(e, c)| (e.clone(), c.clone())));
        let ps: Vec<MultiPoly> = lower.iter().map(|l| top.add(l)).collect();
        for a in &ps {
            for b in &ps {
                prop_assert!(equivalent(a, b).unwrap());
            }
        }
    }

    #[test]
    fn weight_vector_matches_leading_form_classes(ps in prop::collection::vec(nonconstant_poly(2, 3), 1..=6)) {
        let fam = PolyFamily::new(ps).unwrap();
        let w = weight_vector(&fam).unwrap();
        prop_assert_eq!(&w.counts, &weight_by_leading_form(&fam));
        prop_assert!(w.counts.iter().sum::<usize>() <= fam.len());
        prop_assert!(*w.counts.last().unwrap() >= 1);
        prop_assert_eq!(w.degree(), fam.degree() as usize);
    }

    #[test]
    fn weight_order_is_strict_and_total(a in weight(), b in weight(), c in weight()) {
        prop_assert!(!weight_less(&a, &a));
        let outcomes = [weight_less(&a, &b), a == b, weight_less(&b, &a)];
        prop_assert_eq!(outcomes.iter().filter(|x| **x).count(), 1);
        if weight_less(&a, &b) && weight_less(&b, &c) {
            prop_assert!(weight_less(&a, &c));
        }
    }

    #[test]
    fn rank_agrees_with_minor_expansion(m in (1usize..=4, 1usize..=4).prop_flat_map(|(k, l)| linear_rows(k, l))) {
        let (k, l) = (m.len(), m[0].len());
        prop_assert_eq!(rank(&m), rank_by_minors(&m));
        if k == l {
            prop_assert_eq!(det(&m), leibniz(&m));
        }
        let fam = linear_family(&m);
        let ind = r_independent(&fam);
        prop_assert_eq!(ind.independent, rank_by_minors(&m) == k);
    }

    #[test]
    fn decomposition_reconstructs_each_member(ps in prop::collection::vec(nonconstant_poly(2, 3), 1..=5)) {
        let fam = PolyFamily::new(ps).unwrap();
        let dec = independent_decomposition(&fam).unwrap();
        prop_assert!(r_independent(&dec.basis).independent);
        for (j, p) in fam.polys().iter().enumerate() {
            prop_assert_eq!(dec.reconstruct(j), p.without_constant());
            prop_assert_eq!(&dec.constants[j], &p.constant_term());
        }
    }
}

fn invertible(l: usize) -> impl Strategy<Value = Vec<Vec<Coeff>>> {
    prop::collection::vec(prop::collection::vec((-2i64..=2).prop_map(Coeff::from_int), l), l)
        .prop_filter("invertible", |b| !det(b).is_zero())
}

fn family_with_inverse() -> impl Strategy<Value = (Vec<Vec<Coeff>>, Vec<Vec<Coeff>>)> {
    (1usize..=5, 1usize..=3)
        .prop_flat_map(|(k, l)| (linear_rows(k, l), invertible(l)))
        .prop_filter("nice", |(rows, _)| nice_rows(rows))
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(48))]

    #[test]
    fn substitution_then_inverse_is_identity((rows, b) in family_with_inverse()) {
        let fam = linear_family(&rows);
        let binv = inverse_laurent(&b).unwrap();
        let there = change_of_variables(&fam, &b).unwrap();
        let back = change_of_variables(&there, &binv).unwrap();
        prop_assert_eq!(back, fam);
    }

    #[test]
    fn bounds_are_capped_and_zero_exactly_when_independent((rows, b) in family_with_inverse()) {
        let fam = linear_family(&rows);
        let k = fam.len();
        let report = family_complexity_bounds(&fam, &SearchOptions::default()).unwrap();
        prop_assert!(report.family_bound < k.max(1));
        prop_assert_eq!(report.family_bound == 0, complexity_zero(&fam).unwrap());
        prop_assert_eq!(complexity_zero(&fam).unwrap(), rank(&rows) == k);
        for c in &report.per_j {
            prop_assert!(replay_certificate(c, &fam).is_ok());
        }

        let moved = change_of_variables(&fam, &b).unwrap();
        let moved_report = family_complexity_bounds(&moved, &SearchOptions::default()).unwrap();
        prop_assert_eq!(moved_report.family_bound, report.family_bound);
    }

    #[test]
    fn bounds_ignore_member_order((rows, _) in family_with_inverse(), rot in 0usize..5) {
        let fam = linear_family(&rows);
        let k = fam.len();
        let order: Vec<usize> = (0..k).map(|i| (i + rot) % k).rev().collect();
        let a = family_complexity_bounds(&fam, &SearchOptions::default()).unwrap();
        let b = family_complexity_bounds(&fam.permuted(&order), &SearchOptions::default()).unwrap();
        prop_assert_eq!(a.family_bound, b.family_bound);
    }
}
