use criterion::{criterion_group, criterion_main, BenchmarkId, Criterion};
use hflkit_bench::{chain, exponential_paths, fuzz_batch, nested, unrestricted, CHAIN_LENGTHS, NESTING_DEPTHS};
use hflkit_core::semantics::satisfying_states;
use hflkit_core::{nnf, nnf_unshared, typecheck_closed, Evaluator};
use std::hint::black_box;

fn normal_forms(c: &mut Criterion) {
    let mut group = c.benchmark_group("nnf");
    for depth in NESTING_DEPTHS {
        let phi = nested(depth);
        group.bench_with_input(BenchmarkId::new("shared", depth), &phi, |b, phi| {
            b.iter(|| nnf(black_box(phi)).unwrap())
        });
        group.bench_with_input(BenchmarkId::new("unshared", depth), &phi, |b, phi| {
            b.iter(|| nnf_unshared(black_box(phi)).unwrap())
        });
    }
    for size in [100, 500] {
        let phi = unrestricted(5, size);
        group.bench_with_input(BenchmarkId::new("unrestricted", size), &phi, |b, phi| {
            b.iter(|| nnf(black_box(phi)).unwrap())
        });
    }
    group.finish();
}

fn typing(c: &mut Criterion) {
    let batch = fuzz_batch(100, 2, 60);
    c.bench_function("typecheck/fuzz_batch", |b| {
        b.iter(|| batch.iter().map(|f| typecheck_closed(black_box(f)).unwrap().ty.order()).sum::<usize>())
    });
}

fn model_checking(c: &mut Criterion) {
    let mut group = c.benchmark_group("model_check");
    let phi = exponential_paths();
    for k in CHAIN_LENGTHS {
        let lts = chain(k);
        group.bench_with_input(BenchmarkId::new("exponential_paths", k), &lts, |b, lts| {
            b.iter(|| satisfying_states(&Evaluator::new(lts), black_box(&phi)).unwrap())
        });
    }
    group.finish();
}

criterion_group!(benches, normal_forms, typing, model_checking);
criterion_main!(benches);
