use std::hint::black_box;

use criterion::{criterion_group, criterion_main, BenchmarkId, Criterion};
use cstar_core::commutative::lambda_sequence;
use cstar_core::kraus::apply_combination;
use cstar_core::matrix::op_norm;
use cstar_core::sampling::{ginibre, random_combination, seeded};
use cstar_core::verifier::{verify_polyhedron, PolyhedronMode};
use cstar_core::{decide_membership, hull_distance, CMatrix, MatrixFamily, Mode, SolverConfig};

fn lambda_family(d: usize) -> MatrixFamily {
    MatrixFamily::new(
        lambda_sequence(6)
            .into_iter()
            .map(|l| CMatrix::scalar(d, l))
            .collect(),
    )
    .unwrap()
}

fn primitives(c: &mut Criterion) {
    let mut rng = seeded(1);
    let mut group = c.benchmark_group("primitives");
    for d in [2, 4, 8] {
        let a = ginibre(&mut rng, d, d);
        group.bench_with_input(BenchmarkId::new("op_norm", d), &a, |b, a| {
            b.iter(|| op_norm(black_box(a)).unwrap())
        });
        let fam = MatrixFamily::new((0..3).map(|_| ginibre(&mut rng, d, d)).collect()).unwrap();
        let comb = random_combination(&mut rng, 3, d, 4, Mode::ExactUnital);
        group.bench_with_input(
            BenchmarkId::new("apply_combination", d),
            &(fam, comb),
            |b, (f, c)| b.iter(|| apply_combination(black_box(f), black_box(c)).unwrap()),
        );
    }
    group.finish();
}

fn membership(c: &mut Criterion) {
    let cfg = SolverConfig::default();
    let mut rng = seeded(2);
    let mut group = c.benchmark_group("decide_membership");
    group.sample_size(20);
    let p1 = CMatrix::from_real_diagonal(&[1.0, 0.0]);
    let p2 = CMatrix::from_real_diagonal(&[0.0, 1.0]);
    let single = MatrixFamily::new(vec![p1]).unwrap();
    group.bench_function("projection_orbit", |b| {
        b.iter(|| decide_membership(&single, black_box(&p2), Mode::ExactUnital, &cfg).unwrap())
    });
    for d in [2, 3, 4] {
        let fam = MatrixFamily::new((0..3).map(|_| ginibre(&mut rng, d, d)).collect()).unwrap();
        let outside = ginibre(&mut rng, d, d).scale(3.0);
        group.bench_with_input(BenchmarkId::new("separated", d), &d, |b, _| {
            b.iter(|| decide_membership(&fam, black_box(&outside), Mode::SubUnital, &cfg).unwrap())
        });
    }
    group.finish();
}

fn distance_and_verify(c: &mut Criterion) {
    let cfg = SolverConfig::default();
    let mut group = c.benchmark_group("distance");
    group.sample_size(10);
    let fam = lambda_family(2);
    let rest = fam.without(5);
    let target = fam.generators()[5].clone();
    group.bench_function("lambda_hull_distance", |b| {
        b.iter(|| hull_distance(&rest, black_box(&target), Mode::SubUnital, &cfg).unwrap())
    });
    for d in [1, 2] {
        let fam = lambda_family(d);
        group.bench_with_input(BenchmarkId::new("verify_lambda_family", d), &fam, |b, f| {
            b.iter(|| verify_polyhedron(black_box(f), PolyhedronMode::CStarZero, &cfg).unwrap())
        });
    }
    group.finish();
}

criterion_group!(benches, primitives, membership, distance_and_verify);
criterion_main!(benches);
