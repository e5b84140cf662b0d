use chaoswave_bench::{gaussians, sphere};
use chaoswave_core::chaos::{traceless_project, wick_identity_check};
use chaoswave_core::functionals::{betti0_values, excursion_area_values, fraktur_coefficient, moment_integral};
use chaoswave_core::projector::chaos_spectrum;
use chaoswave_core::special::{hermite_fill, legendre_all};
use chaoswave_core::{FieldKind, MehlerOptions, SymmetricTensor};
use criterion::{criterion_group, criterion_main, BenchmarkId, Criterion};
use std::f64::consts::PI;
use std::hint::black_box;

fn special(c: &mut Criterion) {
    let mut out = vec![0.0; 13];
    c.bench_function("hermite_fill/12", |b| b.iter(|| hermite_fill(black_box(0.7), &mut out)));
    c.bench_function("legendre_all/256", |b| b.iter(|| legendre_all(256, black_box(0.3)).unwrap()));
    c.bench_function("moment_integral/l=256,q=4", |b| b.iter(|| moment_integral(black_box(256), 4).unwrap()));
    c.bench_function("fraktur_coefficient/N=13,q=12,i=6", |b| {
        b.iter(|| fraktur_coefficient(13, 12, 6, black_box(0.3), 4.0 * PI).unwrap())
    });
}

fn fields(c: &mut Criterion) {
    let mut group = c.benchmark_group("field_on_grid");
    for l in [5usize, 10, 20] {
        let model = sphere(l);
        let g = gaussians(model.dim(), 1).remove(0);
        let mut out = vec![0.0; model.grid().len()];
        group.bench_with_input(BenchmarkId::from_parameter(l), &l, |b, _| {
            b.iter(|| model.field_on_grid(black_box(&g), FieldKind::Uniform, &mut out))
        });
    }
    group.finish();

    let model = sphere(10);
    let g = gaussians(model.dim(), 1).remove(0);
    let mut values = vec![0.0; model.grid().len()];
    model.field_on_grid(&g, FieldKind::Uniform, &mut values);
    let edges = model.grid().edges();
    let weights = model.grid().weights.clone();
    c.bench_function("excursion_area/l=10", |b| b.iter(|| excursion_area_values(black_box(&values), &weights, 0.25)));
    c.bench_function("betti0/l=10", |b| b.iter(|| betti0_values(black_box(&values), &edges, 0.25)));
}

fn tensors(c: &mut Criterion) {
    let n = 5;
    let mut k = SymmetricTensor::zeros(4, n);
    for (i, v) in k.values_mut().iter_mut().enumerate() {
        *v = ((i * 37 % 11) as f64 - 5.0) / 5.0;
    }
    c.bench_function("traceless_project/q=4,N=5", |b| b.iter(|| traceless_project(black_box(&k))));
    let (tl, _) = traceless_project(&k);
    let g = gaussians(n, 1).remove(0);
    c.bench_function("wick_identity_check/q=4,N=5", |b| b.iter(|| wick_identity_check(black_box(&tl), &g).unwrap()));
}

fn spectrum(c: &mut Criterion) {
    let model = sphere(5);
    let weights = model.grid().weights.clone();
    let opts = MehlerOptions { samples: 2_000, blocks: 20, ..Default::default() };
    let x = |g: &[f64]| {
        let mut f = vec![0.0; weights.len()];
        model.field_on_grid(g, FieldKind::Uniform, &mut f);
        excursion_area_values(&f, &weights, 0.25)
    };
    let mut group = c.benchmark_group("chaos_spectrum");
    group.sample_size(10);
    group.bench_function("area/l=5,2000 samples", |b| b.iter(|| chaos_spectrum(x, model.dim(), &opts).unwrap()));
    group.finish();
}

criterion_group!(benches, special, fields, tensors, spectrum);
criterion_main!(benches);
