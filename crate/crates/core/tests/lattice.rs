mod common;

use common::{box_scan, random_group_spec, seeded, CosetOracle};
use proptest::prelude::*;
use stablefield::lattice::{box_size, smith_normal_form, GroupSpec, IntMatrix, QuotientStructure};

fn structure(d: usize, gens: Vec<Vec<i64>>) -> QuotientStructure {
    QuotientStructure::analyze(&GroupSpec::new(d, gens)).unwrap()
}

/// Orders of elements of Z^d / B Z^d for full-rank B, by brute force over a
/// box of representatives.
fn max_element_order(rows: &[Vec<i64>]) -> (usize, u64) {
    let d = rows.len();
    let cols: Vec<Vec<i64>> = (0..d).map(|j| rows.iter().map(|r| r[j]).collect()).collect();
    let qs = structure(d, cols.clone());
    let oracle = CosetOracle::new(qs.v());
    let scan = box_scan(&oracle, d, 6);
    let reps: Vec<Vec<i64>> = scan.cosets.keys().cloned().collect();
    let zero = oracle.key(&vec![0; d]);
    let mut max_order = 0;
    for r in &reps {
        let mut acc = r.clone();
        let mut k = 1u64;
        while oracle.key(&acc) != zero {
            acc = acc.iter().zip(r).map(|(a, b)| a + b).collect();
            k += 1;
        }
        max_order = max_order.max(k);
    }
    (reps.len(), max_order)
}

#[test]
fn snf_of_coprime_diagonal_is_cyclic_of_order_six() {
    let b = IntMatrix::from_rows(&[vec![2, 0], vec![0, 3]]);
    let snf = smith_normal_form(&b);
    let f: Vec<i64> = snf.invariant_factors.iter().map(|x| i64::try_from(x).unwrap()).collect();
    assert_eq!(f, vec![1, 6]);
    // Independent check: the quotient has 6 elements and one of order 6.
    assert_eq!(max_element_order(&[vec![2, 0], vec![0, 3]]), (6, 6));
    assert_eq!(max_element_order(&[vec![2, 0], vec![0, 4]]), (8, 4));
}

#[test]
fn snf_certificates_on_random_matrices() {
    let mut rng = seeded(11);
    for _ in 0..200 {
        let spec = random_group_spec(&mut rng, 4);
        let b = IntMatrix::from_columns(spec.d, &spec.kernel_gens).unwrap();
        let snf = smith_normal_form(&b);
        snf.verify(&b).unwrap();
    }
}

#[test]
fn three_dim_example_matches_box_scan() {
    let qs = structure(3, vec![vec![1, 1, 0], vec![0, 1, 1]]);
    assert_eq!((qs.p(), qs.q(), qs.l()), (1, 2, 1));
    let oracle = CosetOracle::new(qs.v());
    for n in 1..=8u64 {
        let scan = box_scan(&oracle, 3, n as i64);
        let hn = qs.h_n_with_counts(n);
        assert_eq!(hn.len(), scan.cosets.len(), "n = {n}");
    }
}

#[test]
fn kernel_basis_spans_the_declared_lattice() {
    let mut rng = seeded(5);
    for _ in 0..60 {
        let spec = random_group_spec(&mut rng, 4);
        let qs = QuotientStructure::analyze(&spec).unwrap();
        let oracle = CosetOracle::new(qs.v());
        let zero = oracle.key(&vec![0; spec.d]);
        for g in &spec.kernel_gens {
            assert_eq!(oracle.key(g), zero, "generator {g:?} not in span V");
        }
        // Index of G = F ⊕ K equals l.
        let mut cols = qs.u().columns.clone();
        cols.extend(qs.v().columns.iter().cloned());
        let w = IntMatrix::from_columns(spec.d, &cols).unwrap();
        let det = w.determinant();
        assert_eq!(num_traits::Signed::abs(&det), num_bigint::BigInt::from(qs.l()));
    }
}

#[test]
fn enumeration_agrees_with_box_scan() {
    let mut rng = seeded(2024);
    for case in 0..25 {
        let spec = random_group_spec(&mut rng, 3);
        let qs = QuotientStructure::analyze(&spec).unwrap();
        let oracle = CosetOracle::new(qs.v());
        for n in [1u64, 2, 5, 12] {
            let scan = box_scan(&oracle, spec.d, n as i64);
            let hn = qs.h_n_with_counts(n);
            assert_eq!(hn.len(), scan.cosets.len(), "case {case} n {n}: {spec:?}");
            for (u, m) in &hn {
                let (norm, m_oracle) = scan
                    .cosets
                    .get(u.as_slice())
                    .unwrap_or_else(|| panic!("case {case}: {u:?} is not the canonical representative"));
                assert_eq!(*m, *m_oracle);
                assert_eq!(qs.norm(u) as i64, *norm);
            }
        }
    }
}

#[test]
fn partition_identity_random() {
    let mut rng = seeded(99);
    for _ in 0..15 {
        let spec = random_group_spec(&mut rng, 4);
        let qs = QuotientStructure::analyze(&spec).unwrap();
        for n in [1u64, 3, 6] {
            let total: u64 = qs.h_n_with_counts(n).iter().map(|(_, m)| m).sum();
            assert_eq!(num_bigint::BigInt::from(total), box_size(n, spec.d));
        }
    }
}

#[test]
fn associativity_on_sampled_triples() {
    let qs = structure(3, vec![vec![2, 1, 0], vec![0, 1, 3]]);
    let mut rng = seeded(77);
    use rand::Rng;
    let mut draw = || qs.element(&[rng.gen_range(-9..=9), rng.gen_range(-9..=9), rng.gen_range(-9..=9)]);
    for _ in 0..1000 {
        let (a, b, c) = (draw(), draw(), draw());
        assert_eq!(qs.add(&qs.add(&a, &b), &c), qs.add(&a, &qs.add(&b, &c)));
        assert!(qs.add(&a, &qs.inverse(&a)) == qs.zero());
    }
}

#[test]
fn hn_growth_tracks_n_to_the_p() {
    let qs = structure(3, vec![vec![1, 1, 0], vec![0, 1, 1]]);
    // p = 1; |H_n| / n stays within a bounded band.
    let ratios: Vec<f64> = [10u64, 20, 40].iter().map(|&n| qs.enumerate_h_n(n).len() as f64 / n as f64).collect();
    for w in ratios.windows(2) {
        assert!((w[0] - w[1]).abs() / w[1] < 0.1, "{ratios:?}");
    }
}

fn small_spec() -> impl Strategy<Value = GroupSpec> {
    (1usize..=4).prop_flat_map(|d| {
        let gen = prop::collection::vec(-3i64..=3, d);
        prop::collection::vec(gen, 0..d).prop_map(move |g| GroupSpec::new(d, g))
    })
}

fn spec_with_points() -> impl Strategy<Value = (GroupSpec, Vec<Vec<i64>>)> {
    small_spec().prop_flat_map(|spec| {
        let d = spec.d;
        let pt = prop::collection::vec(-8i64..=8, d);
        (Just(spec), prop::collection::vec(pt, 3))
    })
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn abelian_group_axioms((spec, pts) in spec_with_points()) {
        let qs = QuotientStructure::analyze(&spec).unwrap();
        let a = qs.element(&pts[0]);
        let b = qs.element(&pts[1]);
        let c = qs.element(&pts[2]);
        prop_assert_eq!(qs.add(&a, &b), qs.add(&b, &a));
        prop_assert_eq!(qs.add(&qs.add(&a, &b), &c), qs.add(&a, &qs.add(&b, &c)));
        prop_assert_eq!(qs.add(&a, &qs.zero()), a.clone());
        prop_assert_eq!(qs.add(&a, &qs.inverse(&a)), qs.zero());
    }

    #[test]
    fn norm_symmetry_and_triangle((spec, pts) in spec_with_points()) {
        let qs = QuotientStructure::analyze(&spec).unwrap();
        let a = qs.element(&pts[0]);
        let b = qs.element(&pts[1]);
        prop_assert_eq!(qs.norm(&qs.inverse(&a)), qs.norm(&a));
        prop_assert!(qs.norm(&qs.add(&a, &b)) <= qs.norm(&a) + qs.norm(&b));
        prop_assert!(qs.norm(&a) <= common::abs_max(&pts[0]) as u64);
    }

    #[test]
    fn canonical_form_is_idempotent((spec, pts) in spec_with_points()) {
        let qs = QuotientStructure::analyze(&spec).unwrap();
        let a = qs.element(&pts[0]);
        prop_assert_eq!(qs.element(a.as_slice()), a.clone());
        let c = qs.coords(&pts[0]);
        prop_assert_eq!(qs.element(&qs.from_coords(&c)), a);
    }
}
