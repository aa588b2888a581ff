use std::hint::black_box;

use criterion::{criterion_group, criterion_main, BenchmarkId, Criterion};
use flowcx_core::complexity::{family_complexity_bounds, SearchOptions};
use flowcx_core::density::{syndetic_scan, IntervalSet, ScanOptions};
use flowcx_core::exec::Execution;
use flowcx_core::flows::{multi_average, Observable, RealFamily, SamplingPlan, TorusFlow, TrigPoly};
use flowcx_core::polyfam::coeff::{rat, rat_int};
use flowcx_core::polyfam::PolyFamily;

const MODES: [(&str, Execution); 2] = [("sequential", Execution::Sequential), ("parallel", Execution::Parallel)];

fn averages(c: &mut Criterion) {
    let flow = TorusFlow::new(vec![2f64.sqrt()]);
    let fam = RealFamily::parse("s, s^2, s + s^2", None).unwrap();
    let fs: Vec<Observable> = (1..=3).map(|n| TrigPoly::character(vec![n]).into()).collect();
    let mut g = c.benchmark_group("multi_average");
    g.sample_size(10);
    for (name, exec) in MODES {
        let plan = SamplingPlan::monte_carlo(vec![2000.0], 200_000, 0).with_execution(exec);
        g.bench_function(BenchmarkId::from_parameter(name), |b| {
            b.iter(|| multi_average(&flow, &fam, &fs, black_box(&[0.3]), &plan).unwrap())
        });
    }
    g.finish();
}

fn complexity(c: &mut Criterion) {
    let fam = PolyFamily::parse("u1, u2, u3, u1+u2, u1+u3, u2+u3, u1+u2+u3", None).unwrap();
    let mut g = c.benchmark_group("family_complexity_bounds");
    g.sample_size(10);
    for (name, execution) in MODES {
        let opts = SearchOptions {
            execution,
            ..SearchOptions::default()
        };
        g.bench_function(BenchmarkId::from_parameter(name), |b| {
            b.iter(|| family_complexity_bounds(black_box(&fam), &opts).unwrap())
        });
    }
    g.finish();
}

fn scans(c: &mut Criterion) {
    let e = IntervalSet::periodic(vec![(rat_int(0), rat(3, 10))], rat_int(1)).unwrap();
    let fam = PolyFamily::parse("t, 2t", None).unwrap();
    let mut g = c.benchmark_group("syndetic_scan");
    g.sample_size(10);
    for (name, execution) in MODES {
        let opts = ScanOptions {
            execution,
            ..ScanOptions::new(rat(1, 20), rat(1, 100), rat_int(10), rat(1, 100))
        };
        g.bench_function(BenchmarkId::from_parameter(name), |b| {
            b.iter(|| syndetic_scan(black_box(&e), &fam, &opts).unwrap())
        });
    }
    g.finish();
}

criterion_group!(benches, averages, complexity, scans);
criterion_main!(benches);
