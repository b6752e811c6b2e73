use std::hint::black_box;

use criterion::{criterion_group, criterion_main, BenchmarkId, Criterion};

use umlstate::edhml;
use umlstate::eds;
use umlstate::frontend::{complete_input_enabledness, parse_umlstate};
use umlstate::par;

const GRID: &str = include_str!("../fixtures/grid.umlstate");

fn oracle(c: &mut Criterion) {
    let u = complete_input_enabledness(&parse_umlstate(GRID).unwrap());
    let rho = edhml::characterize(&u, false).unwrap();
    for bound in [6u64, 12] {
        let m = eds::canonical_model(&u, bound).unwrap();
        let mut group = c.benchmark_group(format!("grid_bound_{bound}"));
        for (label, parallel) in [("sequential", false), ("parallel", true)] {
            group.bench_with_input(BenchmarkId::new("is_model_of", label), &parallel, |b, &p| {
                par::set_parallel(p);
                b.iter(|| eds::is_model_of(black_box(&m), &u, bound).unwrap().verdict);
            });
            group.bench_with_input(BenchmarkId::new("sat_sentence", label), &parallel, |b, &p| {
                par::set_parallel(p);
                b.iter(|| edhml::sat_sentence(black_box(&m), &rho, bound).unwrap());
            });
        }
        group.finish();
    }
    par::set_parallel(true);
}

criterion_group!(benches, oracle);
criterion_main!(benches);
