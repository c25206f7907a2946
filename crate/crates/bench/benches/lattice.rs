use criterion::{black_box, criterion_group, criterion_main, Criterion};
use stablefield::lattice::{smith_normal_form, IntMatrix};
use stablefield::{Geometry, GroupSpec, QuotientStructure};

fn lattice(c: &mut Criterion) {
    let b = IntMatrix::from_columns(4, &[vec![2, 1, 0, 3], vec![0, 3, 1, -1], vec![1, 1, 1, 1]]).unwrap();
    c.bench_function("smith normal form 4x3", |bench| bench.iter(|| smith_normal_form(black_box(&b))));

    let spec = GroupSpec::new(3, vec![vec![1, 1, 0], vec![0, 1, 1]]);
    c.bench_function("analyze quotient d=3 q=2", |bench| bench.iter(|| QuotientStructure::analyze(black_box(&spec))));

    let qs = QuotientStructure::analyze(&GroupSpec::new(3, vec![vec![2, 1, 0]])).unwrap();
    c.bench_function("H_n with counts d=3 n=12", |bench| bench.iter(|| qs.h_n_with_counts(black_box(12))));

    let planar = QuotientStructure::analyze(&GroupSpec::new(2, vec![vec![1, 1]])).unwrap();
    c.bench_function("m(t, n) worked example n=200", |bench| bench.iter(|| planar.count_m(black_box(&[7, -3]), 200)));

    let four = QuotientStructure::analyze(&GroupSpec::new(4, vec![vec![1, 1, 0, 0], vec![0, 1, 1, 1]])).unwrap();
    c.bench_function("geometry build d=4 q=2", |bench| bench.iter(|| Geometry::build(black_box(&four))));
}

criterion_group!(benches, lattice);
criterion_main!(benches);
