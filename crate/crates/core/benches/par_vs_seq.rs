use std::hint::black_box;
use std::sync::Arc;

use cnp_core::covariance::{check_t2, check_t3, Representation};
use cnp_core::kgraph::KGraph;
use cnp_core::par::{set_strategy, Strategy};
use cnp_core::random;
use criterion::{criterion_group, criterion_main, BenchmarkId, Criterion};

const TWISTED: &str = include_str!("../../../data/kgraphs/twisted.json");

fn strategies() -> Vec<(&'static str, Strategy)> {
    let mut out = vec![("sequential", Strategy::Sequential)];
    if cfg!(feature = "parallel") {
        out.push(("parallel", Strategy::Parallel));
    }
    out
}

fn toeplitz_checks(c: &mut Criterion) {
    let mut rng = random::rng(9);
    let ps = Arc::new(random::grid2_system(&mut rng).unwrap());
    let rep = Representation::fock(ps, 3).unwrap();
    let mut group = c.benchmark_group("fock_t2_t3");
    group.sample_size(10);
    for (name, s) in strategies() {
        group.bench_function(BenchmarkId::from_parameter(name), |b| {
            set_strategy(s);
            b.iter(|| {
                black_box(check_t2(&rep, 3).unwrap());
                black_box(check_t3(&rep, 3).unwrap());
            })
        });
    }
    group.finish();
}

fn ck_vanishing(c: &mut Criterion) {
    let g = KGraph::from_json_str(TWISTED).unwrap();
    let v = 0;
    let f = g.minimal_exhaustive_sets(v, &g.default_bound()).unwrap().pop().unwrap();
    let qs = g.monoid().ball(2);
    let mut group = c.benchmark_group("ck_defect_window");
    group.sample_size(10);
    for (name, s) in strategies() {
        group.bench_function(BenchmarkId::from_parameter(name), |b| {
            set_strategy(s);
            b.iter(|| {
                let ps = g.product_system().unwrap();
                let fam = g.ck_family(v, &f).unwrap();
                black_box(ps.check_cp_vanishes(&fam, &qs, 5).unwrap())
            })
        });
    }
    group.finish();
}

criterion_group!(benches, toeplitz_checks, ck_vanishing);
criterion_main!(benches);
