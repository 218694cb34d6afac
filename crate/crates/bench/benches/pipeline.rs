use std::hint::black_box;

use criterion::{criterion_group, criterion_main, Criterion};
use stipbow_bench::{blob_volume, clustered_points, random_plane};
use stipbow_core::classify::{rbf_kernel, smo_solve};
use stipbow_core::codebook::{kmeans_fit, KmeansParams};
use stipbow_core::detector::{detect, response_function, DetectorParams};
use stipbow_core::gradient::{cog_descriptor, RatioParams};
use stipbow_core::shape_context::{sc3d_point_descriptors, ShapeContextParams};
use stipbow_core::transform::{dct2, transform_descriptor, TransformMethod, TransformParams};

fn detector(c: &mut Criterion) {
    let v = blob_volume(64, 64, 48);
    let params = DetectorParams::default();
    c.bench_function("response_64x64x48", |b| b.iter(|| response_function(black_box(&v), &params).unwrap()));
    c.bench_function("detect_64x64x48", |b| b.iter(|| detect(black_box(&v), &params).unwrap()));
}

fn descriptors(c: &mut Criterion) {
    let v = blob_volume(64, 64, 48);
    let (cloud, cuboids) = detect(&v, &DetectorParams::default()).unwrap();
    let cuboid = &cuboids[0];
    for method in [TransformMethod::Dct, TransformMethod::Dwt] {
        let params = TransformParams::new(method);
        let name = format!("{}_descriptor", method.descriptor_method().name());
        c.bench_function(&name, |b| b.iter(|| transform_descriptor(black_box(cuboid), &params).unwrap()));
    }
    c.bench_function("cog_descriptor_p10_d3", |b| {
        b.iter(|| cog_descriptor(black_box(cuboid), &RatioParams::default()).unwrap())
    });
    let pts: Vec<[f64; 3]> = cloud.points.iter().map(|p| p.position()).collect();
    c.bench_function("sc3d_cloud", |b| {
        b.iter(|| sc3d_point_descriptors(black_box(&pts), &ShapeContextParams::default()).unwrap())
    });
    let plane = random_plane(17, 17, 1);
    c.bench_function("dct2_17x17", |b| b.iter(|| dct2(black_box(&plane))));
}

fn learning(c: &mut Criterion) {
    let data = clustered_points(20, 100, 32, 3);
    c.bench_function("kmeans_k50_2000x32", |b| b.iter(|| kmeans_fit(black_box(&data), &KmeansParams::new(50, 1)).unwrap()));

    let x = clustered_points(2, 60, 8, 4);
    let y: Vec<f64> = (0..x.len()).map(|i| if i < 60 { 1.0 } else { -1.0 }).collect();
    let kernel: Vec<Vec<f64>> = x.iter().map(|a| x.iter().map(|b| rbf_kernel(a, b, 0.05)).collect()).collect();
    c.bench_function("smo_120", |b| b.iter(|| smo_solve(black_box(&kernel), &y, 10.0, 1e-3).unwrap()));
}

criterion_group! {
    name = benches;
    config = Criterion::default().sample_size(20);
    targets = detector, descriptors, learning
}
criterion_main!(benches);
