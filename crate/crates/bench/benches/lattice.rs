use std::hint::black_box;

use criterion::{criterion_group, criterion_main, Criterion};
use k3tk::constructions::{farey_sweep, triangle_sweep};
use k3tk::{
    build_auxiliary, mukai_pairing, theta_siegel_narain, z_full_factorized, Complex64, EvenLattice, MukaiVector,
    Rational64, Splitting, Truncation,
};

fn pairing(c: &mut Criterion) {
    let l = EvenLattice::new(vec![vec![2, 1, 0, 0], vec![1, -4, 1, 0], vec![0, 1, 2, 0], vec![0, 0, 0, -2]]).unwrap();
    let x = MukaiVector::new(3, vec![1, -2, 5, 7], -4);
    let y = MukaiVector::new(-2, vec![4, 0, -1, 3], 9);
    c.bench_function("mukai_pairing_rank4", |b| b.iter(|| mukai_pairing(black_box(&x), black_box(&y), &l).unwrap()));
}

fn theta(c: &mut Criterion) {
    let l = EvenLattice::new(vec![vec![-2, 1], vec![1, -4]]).unwrap();
    let split = Splitting::definite(&l).unwrap();
    let x = [Complex64::new(0.1, 0.0), Complex64::new(0.0, 0.0)];
    let tau = Complex64::new(0.1, 0.5);
    c.bench_function("theta_rank2_r3", |b| {
        b.iter(|| theta_siegel_narain(&l, black_box(&[1, 2]), 3, tau, &split, &x, 10.0).unwrap())
    });
    let l1 = EvenLattice::rank_one(-2).unwrap();
    let split1 = Splitting::definite(&l1).unwrap();
    let trunc = Truncation {
        exponent_cutoff: Rational64::from_integer(10),
        radius: 8.0,
    };
    c.bench_function("z_full_factorized_r2", |b| {
        b.iter(|| z_full_factorized(&l1, 2, Complex64::new(0.0, 1.0), &split1, &[Complex64::default()], &trunc).unwrap())
    });
}

fn constructions(c: &mut Criterion) {
    c.bench_function("build_auxiliary_4_5_6_1", |b| b.iter(|| build_auxiliary(black_box(4), 5, 6, 1, 500).unwrap()));
    let mut group = c.benchmark_group("sweeps");
    group.sample_size(10);
    group.bench_function("triangle_40", |b| b.iter(|| triangle_sweep(black_box(40))));
    group.bench_function("farey_60", |b| b.iter(|| farey_sweep(black_box(60))));
    group.finish();
}

criterion_group!(benches, pairing, theta, constructions);
criterion_main!(benches);
