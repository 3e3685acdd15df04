use std::hint::black_box;

use aperture_dsm::specfun::{bessel_j_orders, green2d, hankel1_0};
use aperture_dsm::{MeasurementConfig, Point};
use criterion::{criterion_group, criterion_main, Criterion};

fn kernels(c: &mut Criterion) {
    c.bench_function("bessel_j_orders/x=12,p=52", |b| {
        b.iter(|| bessel_j_orders(black_box(52), black_box(12.0)).unwrap())
    });
    c.bench_function("hankel1_0/x=60", |b| b.iter(|| hankel1_0(black_box(60.0)).unwrap()));
    let k = MeasurementConfig::fresnel().wavenumber();
    let (r, src) = (Point::new(0.03, -0.02), Point::new(0.72, 0.0));
    c.bench_function("green2d", |b| b.iter(|| green2d(black_box(k), black_box(r), black_box(src)).unwrap()));
}

criterion_group!(benches, kernels);
criterion_main!(benches);
