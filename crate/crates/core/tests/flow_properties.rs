use flowcx_core::exec::Execution;
use flowcx_core::flows::{
    heis_reduce, hk_seminorm, kronecker_limit, multi_average, Flow, HeisenbergFlow, KroneckerOptions, Observable,
    RealFamily, SamplingPlan, Scheme, SeminormMethod, TorusFlow, TrigPoly,
};
use flowcx_core::polyfam::Coeff;
use num_complex::Complex64;
use proptest::prelude::*;

const SQRT2: f64 = std::f64::consts::SQRT_2;

fn unit() -> impl Strategy<Value = f64> {
    0.0..1.0f64
}

fn time() -> impl Strategy<Value = f64> {
    -100.0..100.0f64
}

/// Heisenberg heights grow like `t^2`, so rounding in `z` reaches 1e-12 near |t| = 100.
fn short_time() -> impl Strategy<Value = f64> {
    -20.0..20.0f64
}

fn amplitude() -> impl Strategy<Value = Complex64> {
    (-1.0..1.0f64, -1.0..1.0f64).prop_map(|(re, im)| Complex64::new(re, im))
}

/// A trigonometric polynomial on `T^1` with up to `max_terms` frequencies in `-4..=4`.
fn trig(max_terms: usize) -> impl Strategy<Value = TrigPoly> {
    prop::collection::vec((-4i64..=4, amplitude()), 1..=max_terms)
        .prop_map(|ts| TrigPoly::new(1, ts.into_iter().map(|(n, a)| (vec![n], a))).unwrap())
        .prop_filter("nonzero", |p| !p.terms().is_empty())
}

fn irrational() -> impl Strategy<Value = f64> {
    prop_oneof![Just(SQRT2), Just(3f64.sqrt()), Just(std::f64::consts::PI), Just(5f64.sqrt() - 1.0)]
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(1000))]

    #[test]
    fn torus_flow_is_a_group_action(
        gamma in prop::collection::vec(-3.0..3.0f64, 1..=3),
        s in time(),
        t in time(),
        seed in prop::collection::vec(unit(), 3),
    ) {
        let flow = TorusFlow::new(gamma.clone());
        let x = &seed[..gamma.len()];
        let composed = flow.apply(s, &flow.apply(t, x));
        let direct = flow.apply(s + t, x);
        prop_assert!(flow.distance(&composed, &direct) <= 1e-12);
        prop_assert!(flow.distance(&flow.apply(0.0, x), x) <= 1e-15);
    }

    #[test]
    fn heisenberg_flow_is_a_group_action(
        alpha in -2.0..2.0f64,
        beta in -2.0..2.0f64,
        zeta in -2.0..2.0f64,
        s in short_time(),
        t in short_time(),
        x in (unit(), unit(), unit()),
    ) {
        let flow = HeisenbergFlow::new(alpha, beta, zeta);
        let x = [x.0, x.1, x.2];
        let composed = flow.apply(s, &flow.apply(t, &x));
        let direct = flow.apply(s + t, &x);
        prop_assert!(flow.distance(&composed, &direct) <= 1e-12, "{:?} vs {:?}", composed, direct);
        prop_assert!(flow.distance(&flow.apply(0.0, &x), &x) <= 1e-15);
    }

    #[test]
    fn heisenberg_reduction_is_idempotent(g in (-50.0..50.0f64, -50.0..50.0f64, -500.0..500.0f64)) {
        let once = heis_reduce([g.0, g.1, g.2]);
        prop_assert!(once.iter().all(|v| (0.0..1.0).contains(v)));
        prop_assert_eq!(heis_reduce(once), once);
    }

    #[test]
    fn heisenberg_projects_onto_the_base_rotation(
        alpha in -2.0..2.0f64,
        beta in -2.0..2.0f64,
        t in time(),
        x in (unit(), unit(), unit()),
    ) {
        let flow = HeisenbergFlow::new(alpha, beta, 0.7);
        let up = flow.apply(t, &[x.0, x.1, x.2]);
        let base = flow.base();
        let down = base.apply(t, &[x.0, x.1]);
        prop_assert!(base.distance(&up[..2], &down) <= 1e-12);
    }
}

fn plans() -> impl Strategy<Value = SamplingPlan> {
    (
        prop_oneof![Just(Scheme::Grid), Just(Scheme::MonteCarlo), Just(Scheme::LowDiscrepancy)],
        1.0..500.0f64,
        1usize..5000,
        any::<u64>(),
    )
        .prop_map(|(scheme, r, samples, seed)| SamplingPlan::new(vec![r, r], scheme, samples, seed))
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(32))]

    #[test]
    fn constant_observables_average_to_their_product(
        a in amplitude(),
        b in amplitude(),
        plan in plans(),
    ) {
        let flow = TorusFlow::new(vec![SQRT2]);
        let fam = RealFamily::parse("s, s*w^2", None).unwrap();
        let fs: Vec<Observable> = vec![TrigPoly::constant(1, a).into(), TrigPoly::constant(1, b).into()];
        let est = multi_average(&flow, &fam, &fs, &[0.2], &plan).unwrap();
        prop_assert_eq!(est.value, a * b);
        prop_assert_eq!(est.stderr, Some(0.0));
    }

    #[test]
    fn averages_are_reproducible_and_execution_independent(plan in plans(), x in unit()) {
        let flow = TorusFlow::new(vec![SQRT2]);
        let fam = RealFamily::parse("s, w, s+w", None).unwrap();
        let fs: Vec<Observable> = (1..=3).map(|n| TrigPoly::character(vec![n]).into()).collect();
        let a = multi_average(&flow, &fam, &fs, &[x], &plan).unwrap();
        let b = multi_average(&flow, &fam, &fs, &[x], &plan).unwrap();
        prop_assert_eq!(&a, &b);
        let seq = multi_average(&flow, &fam, &fs, &[x], &plan.clone().with_execution(Execution::Sequential)).unwrap();
        let par = multi_average(&flow, &fam, &fs, &[x], &plan.clone().with_execution(Execution::Parallel)).unwrap();
        prop_assert_eq!(seq, par);
    }

    #[test]
    fn seminorms_are_nonnegative_and_monotone(f in trig(5), gamma in irrational()) {
        let mut prev = 0.0;
        for k in 1..=5 {
            let v = hk_seminorm(&f, gamma, k, SeminormMethod::ClosedForm).unwrap().value;
            prop_assert!(v >= 0.0);
            prop_assert!(v + 1e-12 >= prev, "k = {}: {} < {}", k, v, prev);
            prev = v;
        }
    }

    #[test]
    fn recursion_tracks_the_closed_form(f in trig(5), gamma in irrational(), k in 1usize..=3) {
        let closed = hk_seminorm(&f, gamma, k, SeminormMethod::ClosedForm).unwrap().value;
        let rec = hk_seminorm(&f, gamma, k, SeminormMethod::Recursion { n: 500 }).unwrap().value;
        prop_assert!((closed - rec).abs() <= 0.05, "k = {}: {} vs {}", k, closed, rec);
    }

    #[test]
    fn frequency_matching_agrees_with_quadrature(
        alpha in (2usize..=3, 1usize..=2).prop_flat_map(|(k, l)| {
            prop::collection::vec(prop::collection::vec(-2i64..=2, l), k)
        }),
        fs in prop::collection::vec(trig(3), 3),
        x in unit(),
    ) {
        let alpha: Vec<Vec<Coeff>> = alpha.iter().map(|r| r.iter().map(|&a| Coeff::from_int(a)).collect()).collect();
        let fs: Vec<Observable> = fs.into_iter().take(alpha.len()).map(Observable::from).collect();
        let lim = kronecker_limit(&alpha, &fs, &[x], &KroneckerOptions::default()).unwrap();
        let c = lim.closed_form.expect("trigonometric inputs have a closed form");
        prop_assert!((c - lim.quadrature).norm() <= 1e-3, "{} vs {}", c, lim.quadrature);
    }
}
