use criterion::{criterion_group, criterion_main, BenchmarkId, Criterion};
use osk_bench::{wide_f, worked_source};
use osk_core::forward::{mode_table, solve_heat, HeatProblem};
use osk_core::Axis;
use std::hint::black_box;

fn problem(n_max: usize, omega: f64) -> HeatProblem {
    HeatProblem {
        f: wide_f(n_max),
        source: worked_source(),
        omega,
        horizon: 2.0,
        n_max,
    }
}

fn bench_mode_table(c: &mut Criterion) {
    let mut group = c.benchmark_group("mode_table");
    let axis = Axis::new(0.0, 2.0, 257).unwrap();
    for n_max in [8usize, 32] {
        let p = problem(n_max, 200.0);
        group.bench_with_input(BenchmarkId::from_parameter(n_max), &p, |b, p| {
            b.iter(|| mode_table(black_box(p), &axis))
        });
    }
    group.finish();
}

fn bench_solve_heat(c: &mut Criterion) {
    let p = problem(32, 1e4);
    c.bench_function("solve_heat_33x257", |b| {
        b.iter(|| solve_heat(black_box(&p), 33, 257).unwrap())
    });
}

criterion_group!(benches, bench_mode_table, bench_solve_heat);
criterion_main!(benches);
