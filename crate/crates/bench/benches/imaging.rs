use aperture_dsm::structure::SeriesTruncation;
use aperture_dsm::{
    image, structure_vs_direct, synthesize, Complex64, ForwardModel, ImagingGrid, ImagingMode, MeasurementConfig,
    ObjectSet,
};
use criterion::{criterion_group, criterion_main, Criterion};

fn imaging(c: &mut Criterion) {
    let cfg = MeasurementConfig::fresnel();
    let objects = ObjectSet::fresnel_two_disks(cfg.eps_b);
    let matrix = synthesize(&cfg, &objects, Complex64::new(0.0, 0.0), ForwardModel::Point).unwrap();
    let grid = ImagingGrid::standard();

    let mut group = c.benchmark_group("image/101x101");
    group.sample_size(10);
    group.bench_function("single", |b| {
        b.iter(|| image(&matrix, &grid, ImagingMode::Single { source: 1 }, true).unwrap())
    });
    group.bench_function("multi", |b| b.iter(|| image(&matrix, &grid, ImagingMode::Multi, true).unwrap()));
    group.finish();

    let small = ImagingGrid::standard().with_resolution(41, 41);
    let trunc = SeriesTruncation::with_order(60, 0.0);
    let mut group = c.benchmark_group("structure_vs_direct/41x41");
    group.sample_size(10);
    group.bench_function("single", |b| {
        b.iter(|| structure_vs_direct(&matrix, &objects, &small, ImagingMode::Single { source: 1 }, &trunc).unwrap())
    });
    group.finish();
}

criterion_group!(benches, imaging);
criterion_main!(benches);
