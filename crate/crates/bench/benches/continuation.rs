use criterion::{criterion_group, criterion_main, Criterion};
use std::hint::black_box;

use rmono::continuation::DEFAULT_TOL;
use rmono::{monodromy_of, plan_loops, realize_riemann, SearchConfig};
use rmono_bench::{golden_equation, hypergeometric_equation, irreducible_rep};

fn monodromy(c: &mut Criterion) {
    let mut group = c.benchmark_group("monodromy_of");
    for (name, eq) in [("golden", golden_equation()), ("hypergeometric", hypergeometric_equation())] {
        let plan = plan_loops(&eq.divisor, None);
        for tol in [1e-8, DEFAULT_TOL] {
            group.bench_function(format!("{name}/tol={tol:e}"), |b| {
                b.iter(|| monodromy_of(black_box(&eq), &plan, tol).unwrap())
            });
        }
    }
    group.finish();
}

fn realize(c: &mut Criterion) {
    let rep = irreducible_rep();
    let cfg = SearchConfig::default();
    c.bench_function("realize_riemann/irreducible", |b| {
        b.iter(|| realize_riemann(black_box(&rep), &cfg).unwrap())
    });
}

criterion_group! {
    name = benches;
    config = Criterion::default().sample_size(20);
    targets = monodromy, realize
}
criterion_main!(benches);
