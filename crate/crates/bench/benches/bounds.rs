use criterion::{criterion_group, criterion_main, Criterion};
use epb_core::bounds::{fractional_packing, independence_number, lovasz_theta};
use epb_core::graph::{chsh_graph, cycle_graph};
use std::hint::black_box;

fn bounds(c: &mut Criterion) {
    let chsh = chsh_graph();
    let ring = cycle_graph(40);
    c.bench_function("independence_number/chsh", |b| {
        b.iter(|| independence_number(black_box(&chsh)).unwrap())
    });
    c.bench_function("independence_number/c40", |b| {
        b.iter(|| independence_number(black_box(&ring)).unwrap())
    });
    c.bench_function("fractional_packing/chsh", |b| {
        b.iter(|| fractional_packing(black_box(&chsh)).unwrap())
    });
    c.bench_function("lovasz_theta/chsh", |b| {
        b.iter(|| lovasz_theta(black_box(&chsh)).unwrap())
    });
    c.bench_function("lovasz_theta/c13", |b| {
        let g = cycle_graph(13);
        b.iter(|| lovasz_theta(black_box(&g)).unwrap())
    });
}

criterion_group!(benches, bounds);
criterion_main!(benches);
