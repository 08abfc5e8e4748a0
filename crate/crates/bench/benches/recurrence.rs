use std::hint::black_box;

use cbs_complexity::genfunc::{contributions, expand_series};
use cbs_complexity::recurrence::{eval_exact, eval_log};
use criterion::{criterion_group, criterion_main, BenchmarkId, Criterion};

fn recurrence(c: &mut Criterion) {
    let mut group = c.benchmark_group("recurrence");
    for (r, s) in [(200u64, 20u64), (1000, 60), (4000, 100)] {
        group.bench_with_input(BenchmarkId::new("exact", format!("{r}x{s}")), &(r, s), |b, &(r, s)| {
            b.iter(|| eval_exact(black_box(r), black_box(s)).unwrap())
        });
        group.bench_with_input(BenchmarkId::new("log", format!("{r}x{s}")), &(r, s), |b, &(r, s)| {
            b.iter(|| eval_log(black_box(r), black_box(s)))
        });
    }
    group.finish();
}

fn generating_function(c: &mut Criterion) {
    c.bench_function("series 40x20", |b| b.iter(|| expand_series(black_box(40), black_box(20))));
    c.bench_function("contributions 2000x200", |b| {
        b.iter(|| contributions(black_box(2000), black_box(200)).unwrap())
    });
}

criterion_group!(benches, recurrence, generating_function);
criterion_main!(benches);
