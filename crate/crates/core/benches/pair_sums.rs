use criterion::{criterion_group, criterion_main, BenchmarkId, Criterion};
use frac_orlicz::domain::{make_test_function, Domain, TestKind};
use frac_orlicz::fracspace::{frac_modular, gagliardo_seminorm, FracParams};
use frac_orlicz::nfunction::NFunctionSpec;
use frac_orlicz::operator::apply_field;
use frac_orlicz::par;
use std::hint::black_box;

fn params() -> FracParams {
    FracParams::new(0.4, NFunctionSpec::power_log(2.0).unwrap()).unwrap()
}

fn modular(c: &mut Criterion) {
    let mut group = c.benchmark_group("frac_modular");
    let p = params();
    for n in [128usize, 512] {
        let d = Domain::interval(0.0, 1.0, n).unwrap();
        let u = make_test_function(TestKind::Bump, &d, 0);
        group.bench_with_input(BenchmarkId::new("parallel", n), &u, |b, u| {
            b.iter(|| frac_modular(black_box(u), &p, 1.0).unwrap())
        });
        group.bench_with_input(BenchmarkId::new("sequential", n), &u, |b, u| {
            b.iter(|| par::sequential(|| frac_modular(black_box(u), &p, 1.0).unwrap()))
        });
    }
    group.finish();
}

fn seminorm_2d(c: &mut Criterion) {
    let mut group = c.benchmark_group("gagliardo_seminorm_2d");
    group.sample_size(10);
    let p = params();
    let d = Domain::rectangle([0.0, 1.0], [0.0, 1.0], [24, 24]).unwrap();
    let u = make_test_function(TestKind::Bump, &d, 0);
    group.bench_function("parallel", |b| b.iter(|| gagliardo_seminorm(black_box(&u), &p).unwrap()));
    group.bench_function("sequential", |b| b.iter(|| par::sequential(|| gagliardo_seminorm(black_box(&u), &p).unwrap())));
    group.finish();
}

fn operator_field(c: &mut Criterion) {
    let mut group = c.benchmark_group("apply_field");
    let p = params();
    let d = Domain::interval(0.0, 1.0, 256).unwrap();
    let u = make_test_function(TestKind::Bump, &d, 0);
    group.bench_function("parallel", |b| b.iter(|| apply_field(black_box(&u), &p).unwrap()));
    group.bench_function("sequential", |b| b.iter(|| par::sequential(|| apply_field(black_box(&u), &p).unwrap())));
    group.finish();
}

criterion_group!(benches, modular, seminorm_2d, operator_field);
criterion_main!(benches);
