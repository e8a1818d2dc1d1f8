use std::hint::black_box;

use criterion::{criterion_group, criterion_main, BenchmarkId, Criterion};

use expandlab::constructions::{haar_unitary_tuple, random_prime_tuple};
use expandlab::dimension::exact_expansion_finite_field;
use expandlab::graph::{edge_expansion, Graph};
use expandlab::par;
use expandlab::quantum::quantum_edge_bracket;
use expandlab::rng;
use expandlab::verify::pointwise_battery;

/// Runs `f` once on a single worker and once on the default pool.
fn compare<F: Fn() + Sync + Send>(c: &mut Criterion, group: &str, f: F) {
    let mut g = c.benchmark_group(group);
    g.sample_size(10);
    g.bench_function(BenchmarkId::new("sequential", 1), |b| b.iter(|| par::with_threads(1, &f)));
    let workers = std::thread::available_parallelism().map_or(1, |n| n.get());
    g.bench_function(BenchmarkId::new("parallel", workers), |b| b.iter(&f));
    g.finish();
}

fn graph_enumeration(c: &mut Criterion) {
    let mut r = rng::stream(1, "bench", &[]);
    let g = Graph::random_regular(18, 3, &mut r).unwrap();
    compare(c, "edge_expansion_n18", || {
        black_box(edge_expansion(&g, 20).unwrap());
    });
}

fn bracket_search(c: &mut Criterion) {
    let u = haar_unitary_tuple(8, 3, 2).unwrap();
    compare(c, "hq_bracket_n8", || {
        black_box(quantum_edge_bracket(&u, 2000, 3).unwrap());
    });
}

fn finite_field_enumeration(c: &mut Criterion) {
    let b = random_prime_tuple(6, 2, 2, false, 4).unwrap();
    compare(c, "f2_exact_n6", || {
        black_box(exact_expansion_finite_field(&b, 2).unwrap());
    });
}

fn suites(c: &mut Criterion) {
    compare(c, "pointwise_200", || {
        black_box(pointwise_battery(200, 5).unwrap());
    });
}

criterion_group!(benches, graph_enumeration, bracket_search, finite_field_enumeration, suites);
criterion_main!(benches);
