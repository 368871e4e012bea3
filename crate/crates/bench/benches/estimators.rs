use criterion::{criterion_group, criterion_main, BenchmarkId, Criterion};
use std::hint::black_box;

use monollr::{
    distribution, local_weights, point_predict, KernelFamily, Method, MonotoneAlgorithm,
    WeightMode, Window,
};
use monollr_bench::{config, sine_sample};

fn weights(c: &mut Criterion) {
    let mut group = c.benchmark_group("local_weights");
    for n in [101, 1001, 10001] {
        let sample = sine_sample(n);
        let h = 50.0 / n as f64;
        group.bench_with_input(BenchmarkId::from_parameter(n), &sample, |b, s| {
            b.iter(|| {
                local_weights(
                    black_box(0.5),
                    s.xs(),
                    h,
                    KernelFamily::Gaussian,
                    WeightMode::LocalLinear,
                )
            })
        });
    }
    group.finish();
}

fn distributions(c: &mut Criterion) {
    let n = 1001;
    let sample = sine_sample(n);
    let mut group = c.benchmark_group("distribution_boundary");
    for method in [Method::Lc, Method::Llh, Method::Llm] {
        for b in [10.0, 50.0, 140.0] {
            let cfg = config(b, n, Window::OneSidedLeft);
            group.bench_with_input(BenchmarkId::new(method.name(), b), &cfg, |bench, cfg| {
                bench.iter(|| distribution(&sample, black_box(1.0), cfg, method).unwrap())
            });
        }
    }
    let cfg =
        config(50.0, n, Window::OneSidedLeft).with_algorithm(MonotoneAlgorithm::ClippedDensity);
    group.bench_function("llm_clipped_density/50", |bench| {
        bench.iter(|| distribution(&sample, black_box(1.0), &cfg, Method::Llm).unwrap())
    });
    group.finish();
}

fn predictions(c: &mut Criterion) {
    let n = 1001;
    let sample = sine_sample(n);
    let cfg = config(50.0, n, Window::TwoSided);
    let mut group = c.benchmark_group("point_predict");
    for method in Method::ALL {
        group.bench_function(method.name(), |bench| {
            bench.iter(|| point_predict(&sample, black_box(0.2), &cfg, method).unwrap())
        });
    }
    group.finish();
}

criterion_group!(benches, weights, distributions, predictions);
criterion_main!(benches);
