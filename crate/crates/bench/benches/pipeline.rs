use std::hint::black_box;

use criterion::{criterion_group, criterion_main, Criterion};
use detsurf::detpoly::det_poly;
use detsurf::invariants::{sphere_density, volume, Backend, Invariant};
use detsurf::io::fixtures;
use detsurf::quadrature::{design_text, icosahedron, integrate_design, load_design};
use detsurf::surface::{implicit_point, jet};
use nalgebra::Vector3;

fn polynomial(c: &mut Criterion) {
    let t = fixtures::no1();
    c.bench_function("det_poly T001", |b| b.iter(|| det_poly(black_box(&t)).unwrap()));
    let f = det_poly(&t).unwrap();
    let u = Vector3::new(0.3, -0.5, 0.81).normalize();
    c.bench_function("poly jet", |b| b.iter(|| f.jet(black_box(&u))));
}

fn geometry(c: &mut Criterion) {
    let f = det_poly(&fixtures::no1()).unwrap();
    c.bench_function("surface jet", |b| b.iter(|| jet(&f, black_box(1.1), black_box(2.3))));
    let u = Vector3::new(0.3, -0.5, 0.81).normalize();
    c.bench_function("implicit point", |b| b.iter(|| implicit_point(&f, black_box(&u))));
}

fn integration(c: &mut Criterion) {
    let f = det_poly(&fixtures::no1()).unwrap();
    let mut group = c.benchmark_group("integration");
    group.sample_size(10);
    group.bench_function("adaptive volume T001 1e-7", |b| b.iter(|| volume(&f, &Backend::adaptive(1e-7)).unwrap()));
    let design = load_design(&design_text(&icosahedron()), 5, "icosahedron").unwrap();
    group.bench_function("icosahedron affine area", |b| {
        b.iter(|| integrate_design(|u| sphere_density(&f, Invariant::AffineArea, u), &design).unwrap())
    });
    group.finish();
}

criterion_group!(benches, polynomial, geometry, integration);
criterion_main!(benches);
