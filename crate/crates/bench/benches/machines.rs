use criterion::{black_box, criterion_group, criterion_main, BenchmarkId, Criterion};
use stab::atm::{compile, machines, Poly};
use stab::corpus::m_n;
use stab::machine::{eval_big, run_small};
use stab::report::run_report;

const FUEL: usize = 10_000_000;

fn exponential_family(c: &mut Criterion) {
    let mut g = c.benchmark_group("m_n");
    g.sample_size(20);
    for n in [2, 4, 6, 8] {
        let d = m_n(n);
        g.bench_with_input(BenchmarkId::new("big_step", n), &d.term, |b, t| {
            b.iter(|| eval_big(black_box(t)).unwrap())
        });
        g.bench_with_input(BenchmarkId::new("small_step", n), &d.term, |b, t| {
            b.iter(|| run_small(black_box(t)).unwrap())
        });
        g.bench_with_input(BenchmarkId::new("report", n), &d, |b, d| {
            b.iter(|| run_report(black_box(d), FUEL).unwrap())
        });
    }
    g.finish();
}

fn compiled_machine(c: &mut Criterion) {
    let spec = machines::contains_one();
    let poly = Poly::new(vec![0, 1]);
    let mut g = c.benchmark_group("atm");
    g.sample_size(10);
    g.bench_function("compile", |b| b.iter(|| compile(black_box(&spec), &poly).unwrap()));
    let mut compiled = compile(&spec, &poly).unwrap();
    let program = compiled.program(&[0, 0, 1]);
    g.bench_function("run_001", |b| b.iter(|| eval_big(black_box(&program.term)).unwrap()));
    g.finish();
}

criterion_group!(benches, exponential_family, compiled_machine);
criterion_main!(benches);
