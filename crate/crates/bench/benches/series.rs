use std::hint::black_box;

use criterion::{criterion_group, criterion_main, Criterion};
use k3tk::qseries::gottsche_coefficients;
use k3tk::{chi_virtual, z_psu_direct, z_psu_hecke, z_psu_hecke_literal, EvenLattice, MukaiVector, Rational64};

fn gottsche(c: &mut Criterion) {
    gottsche_coefficients(400);
    c.bench_function("gottsche_400_cached", |b| b.iter(|| gottsche_coefficients(black_box(400))));
}

fn chi(c: &mut Criterion) {
    let l = EvenLattice::rank_one(2).unwrap();
    let v = MukaiVector::new(12, vec![0], -24);
    c.bench_function("chi_virtual_content_12", |b| b.iter(|| chi_virtual(black_box(&v), &l).unwrap()));
}

fn partition_functions(c: &mut Criterion) {
    let l = EvenLattice::rank_one(2).unwrap();
    let order = Rational64::from_integer(12);
    let mut group = c.benchmark_group("z_psu_r6_order12");
    group.bench_function("direct", |b| b.iter(|| z_psu_direct(6, black_box(&[2]), order, &l).unwrap()));
    group.bench_function("hecke", |b| b.iter(|| z_psu_hecke(6, black_box(&[2]), order, &l).unwrap()));
    group.bench_function("literal", |b| {
        b.iter(|| z_psu_hecke_literal(6, black_box(&[2]), order, &l).unwrap())
    });
    group.finish();
}

criterion_group!(benches, gottsche, chi, partition_functions);
criterion_main!(benches);
