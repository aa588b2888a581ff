use flowcx_core::complexity::{
    family_complexity_bounds, pj_bound_search, replay_certificate, ReplayError, Rule,
    SearchOptions,
};
use flowcx_core::polyfam::{Coeff, PolyFamily};

fn fam(s: &str) -> PolyFamily {
    PolyFamily::parse(s, None).unwrap()
}

fn bound(s: &str) -> usize {
    let f = fam(s);
    let r = family_complexity_bounds(&f, &SearchOptions::default()).unwrap();
    for c in &r.per_j {
        replay_certificate(c, &f).unwrap();
    }
    r.family_bound
}

fn cube(l: usize) -> String {
    let mut out = Vec::new();
    for mask in 1..(1u32 << l) {
        let terms: Vec<String> = (0..l)
            .filter(|i| mask & (1 << i) != 0)
            .map(|i| format!("u{}", i + 1))
            .collect();
        out.push(terms.join("+"));
    }
    out.join(", ")
}

#[test]
fn independent_families_have_zero_bound() {
    assert_eq!(bound("t, t^2"), 0);
    assert_eq!(bound("u1, u2, u3"), 0);
}

#[test]
fn families_with_one_repeated_direction() {
    for s in [
        "u1, 2u1, u2",
        "u1, u2, 2u1-u2",
        "u1, u2, u3, pi*u1+pi^2*u3, 3u2",
        "u1, u2, u3, 2u1+u4, 2u2+u4, 2u3+u4",
    ] {
        assert_eq!(bound(s), 1, "{s}");
    }
}

#[test]
fn worked_examples() {
    assert_eq!(bound("u1, u2, u1+u2"), 1);
    assert_eq!(bound("u1, u2, u3, u1+u2+u3"), 1);
    assert!(bound("u1, u2, u3, u1+u2, u1+u3, u2+u3, u1+u2+u3") <= 2);
    assert!(bound("u1, u2, u3, u1+u2, u2+u3, u1+u3") <= 2);
    assert!(bound(&cube(2)) <= 2);
    assert!(bound(&cube(3)) <= 3);
    assert_eq!(
        bound("pi*u1+pi^2*u2, pi^2*u1+pi^3*u3, pi*u1+pi^2*u2+pi*u3, pi*u2+pi*u3"),
        1
    );
    assert_eq!(bound("t, 2t, t^2"), 1);
    assert_eq!(bound("t, t^2, t+t^2"), 1);
    assert_eq!(bound("t, t^2, t^3, t+t^2+t^3"), 1);
    assert_eq!(bound("t, t^2, 3t^2+pi*t"), 1);
}

#[test]
fn single_member_search() {
    let f = fam("u1, u2, u1+u2");
    let c = pj_bound_search(&f, 2, &SearchOptions::default()).unwrap();
    assert_eq!(c.bound, 1);
    assert_eq!(c.rule, Rule::DistinctValues);
    let f = fam("u1, u2, u3, u1+u2+u3");
    let c = pj_bound_search(&f, 3, &SearchOptions::default()).unwrap();
    assert_eq!(c.bound, 1);
    let c = pj_bound_search(&fam("t, t^2"), 1, &SearchOptions::default()).unwrap();
    assert_eq!((c.bound, c.rule), (0, Rule::Independent));
}

#[test]
fn no_budget_no_refinement_falls_back_to_cap() {
    let opts = SearchOptions {
        budget: 0,
        refine: false,
        ..SearchOptions::default()
    };
    let f = fam("u1, u2, u1+u2");
    let r = family_complexity_bounds(&f, &opts).unwrap();
    assert_eq!(r.family_bound, 2);
    assert!(r.per_j.iter().all(|c| c.fallback && c.rule == Rule::GenericCap));
    replay_certificate(&r.per_j[0], &f).unwrap();
}

#[test]
fn tampering_is_detected() {
    let f = fam("u1, u2, u1+u2");
    let r = family_complexity_bounds(&f, &SearchOptions::default()).unwrap();
    let mut c = r.per_j[2].clone();
    c.substitutions[0].b[0][0] = &c.substitutions[0].b[0][0] + &Coeff::one();
    assert!(replay_certificate(&c, &f).is_err());

    let permuted = f.permuted(&[2, 0, 1]);
    assert_eq!(
        replay_certificate(&r.per_j[0], &permuted),
        Err(ReplayError::IndexMismatch)
    );
}

#[test]
fn report_serializes() {
    let f = fam("t, 2t, t^2");
    let r = family_complexity_bounds(&f, &SearchOptions::default()).unwrap();
    let v = serde_json::to_value(&r).unwrap();
    assert_eq!(v["family_bound"], 1);
    assert_eq!(v["linearization"][1], "2*u1");
    assert_eq!(v["per_j"][0]["j"], 1);
    assert!(v["per_j"][0]["substitutions"][0]["B"].is_array());
}
