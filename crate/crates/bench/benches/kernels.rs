use criterion::{criterion_group, criterion_main, Criterion};
use std::hint::black_box;

use levy2_core::diophantine::{records_of, FixedVector};
use levy2_core::{build_f, estimate_mu7, inner_integrand, integrate_outer, ParamPoint};

fn kernels(c: &mut Criterion) {
    let a = ParamPoint::new(-0.3, 0.6);
    c.bench_function("build_f", |bench| bench.iter(|| build_f(black_box(a), black_box(0.4))));
    c.bench_function("inner_integrand", |bench| {
        bench.iter(|| inner_integrand(black_box(a), black_box(0.4)))
    });

    let v1 = FixedVector::from_f64(&[0.3819660112501051]).unwrap();
    let v2 = FixedVector::from_f64(&[0.2718281828459045, 0.414213562373095]).unwrap();
    c.bench_function("record_scan_d1_1e6", |bench| bench.iter(|| records_of(black_box(&v1), 1_000_000)));
    c.bench_function("record_scan_d2_1e6", |bench| bench.iter(|| records_of(black_box(&v2), 1_000_000)));

    let mut slow = c.benchmark_group("slow");
    slow.sample_size(10);
    slow.bench_function("mc_block_65536", |bench| bench.iter(|| estimate_mu7(1 << 16, black_box(1))));
    slow.bench_function("integrate_outer_1e-8", |bench| bench.iter(|| integrate_outer(black_box(1e-8), 100_000_000)));
    slow.finish();
}

criterion_group!(benches, kernels);
criterion_main!(benches);
