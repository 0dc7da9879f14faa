use std::hint::black_box;

use criterion::{criterion_group, criterion_main, BenchmarkId, Criterion};

use assoclab::assoc::{draw_counts, mc_association_test, Hypothesis, Split, TestSettings};
use assoclab::experiment::ProcessSpec;
use assoclab::measures::Window;
use assoclab::par::Execution;

const MODES: [(&str, Execution); 2] = [("sequential", Execution::Sequential), ("parallel", Execution::Parallel)];

fn counts(c: &mut Criterion) {
    let process = ProcessSpec::Poisson { rate: 50.0 }.build(&Window::unit(2), 2).unwrap();
    let mut group = c.benchmark_group("poisson_counts_20000");
    group.sample_size(10);
    for (name, exec) in MODES {
        group.bench_with_input(BenchmarkId::from_parameter(name), &exec, |b, &exec| {
            b.iter(|| black_box(draw_counts(&process, 20_000, 1, exec).unwrap()))
        });
    }
    group.finish();
}

fn association_test(c: &mut Criterion) {
    let process = ProcessSpec::Gaussian {
        mean: vec![0.0; 4],
        cov: (0..4).map(|i| (0..4).map(|j| if i == j { 1.0 } else { -0.2 }).collect()).collect(),
    }
    .build(&Window::unit(1), 0)
    .unwrap();
    let settings = TestSettings::new(Hypothesis::Negative, 20_000, 2);
    let split = Split::halves(4);
    let mut group = c.benchmark_group("gaussian_na_test_20000");
    group.sample_size(10);
    for (name, exec) in MODES {
        group.bench_with_input(BenchmarkId::from_parameter(name), &exec, |b, &exec| {
            b.iter(|| black_box(mc_association_test(&process, &split, &settings, exec).unwrap()))
        });
    }
    group.finish();
}

criterion_group!(benches, counts, association_test);
criterion_main!(benches);
