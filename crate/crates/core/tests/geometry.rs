use std::f64::consts::{FRAC_1_SQRT_2, PI, SQRT_2};

use proptest::prelude::*;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use selftest::geometry::{
    angles_from_correlations, canonicalize, check_selftest_condition, chsh_max, chsh_max_table, classify, condition_residual,
    nonlocality_witness, AnglePoint, Classification, CorrelationPoint, DegenerateCase, Relabeling,
};

const TOL: f64 = 1e-9;

/// Every signed CHSH combination over every pair of columns, enumerated
/// as sign vectors with an odd number of minus signs.
fn brute_chsh(rows: [&[f64]; 2]) -> f64 {
    let n = rows[0].len();
    let mut best = f64::NEG_INFINITY;
    for y in 0..n {
        for z in 0..n {
            if y == z {
                continue;
            }
            for mask in 0u8..16 {
                if mask.count_ones() % 2 == 0 {
                    continue;
                }
                let s = |k: u8| if mask & (1 << k) != 0 { -1.0 } else { 1.0 };
                let v = s(0) * rows[0][y] + s(1) * rows[0][z] + s(2) * rows[1][y] + s(3) * rows[1][z];
                best = best.max(v);
            }
        }
    }
    best
}

fn canonical_strategy() -> impl Strategy<Value = AnglePoint> {
    (0.05..PI - 0.05, 0.0..1.0f64, 0.0..1.0f64).prop_map(|(theta, u, v)| {
        let a00 = u * theta;
        let a01 = theta + v * (PI - theta);
        AnglePoint::canonical(theta, a00, a01).unwrap()
    })
}

fn relabeling_strategy() -> impl Strategy<Value = Relabeling> {
    (0usize..64).prop_map(|k| Relabeling::all().nth(k).unwrap())
}

#[test]
fn golden_points_self_test() {
    let h = FRAC_1_SQRT_2;
    for flat in [[h, h, h, -h], [h, 0.0, h, 1.0]] {
        let p = CorrelationPoint::from_flat(flat).unwrap();
        let Classification::SelfTesting { condition, relabeling } = classify(&p, TOL) else {
            panic!("{flat:?} should self-test");
        };
        assert!(condition.residual <= 1e-12);
        let q = relabeling.apply(&p);
        assert!(condition_residual(&q, 0, 1, 1) <= 1e-12);
    }
}

#[test]
fn two_zero_patterns_are_degenerate_local() {
    // (positions with E = 1, case)
    let cases = [
        ([(0, 0), (1, 0)], DegenerateCase::I),
        ([(0, 0), (0, 1)], DegenerateCase::II),
        ([(0, 0), (1, 1)], DegenerateCase::III),
        ([(0, 1), (1, 0)], DegenerateCase::IV),
        ([(0, 1), (1, 1)], DegenerateCase::V),
        ([(1, 0), (1, 1)], DegenerateCase::VI),
    ];
    for c in [0.0, 0.3, -0.8] {
        for (ones, case) in cases {
            let mut e = [[c; 2]; 2];
            for (x, y) in ones {
                e[x][y] = 1.0;
            }
            let p = CorrelationPoint::new(e).unwrap();
            assert!(!check_selftest_condition(&p, TOL).is_empty(), "{e:?}");
            assert_eq!(classify(&p, TOL), Classification::DegenerateLocal { case }, "{e:?}");
        }
    }
}

#[test]
fn mayers_yao_chsh_value() {
    let h = FRAC_1_SQRT_2;
    let v = chsh_max_table(&[1.0, 0.0, h], &[0.0, 1.0, h]);
    assert!((v - (1.0 + SQRT_2)).abs() <= 1e-12);
    assert!((brute_chsh([&[1.0, 0.0, h], &[0.0, 1.0, h]]) - v).abs() <= 1e-15);
}

#[test]
fn one_degenerate_angle_violates_chsh() {
    let mut rng = ChaCha8Rng::seed_from_u64(8);
    let mut done = 0;
    while done < 100 {
        let a01: f64 = rng.gen_range(0.05..PI - 0.05);
        let a11: f64 = rng.gen_range(0.05..PI - 0.05);
        // α00 = 0 puts θ = α10 and α01 = α10 + α11
        let a10 = a01 - a11;
        if !(0.05..=PI - 0.05).contains(&a10) {
            continue;
        }
        let a = AnglePoint::from_flat([0.0, a01, a10, a11]).unwrap();
        assert!(a.is_canonical());
        assert!(nonlocality_witness(&a));
        let p = a.correlators();
        let e = p.correlators();
        assert!(chsh_max(&p) > 2.0, "{a:?}");
        assert!((chsh_max(&p) - brute_chsh([&e[0], &e[1]])).abs() <= 1e-12);
        done += 1;
    }
}

proptest! {
    #[test]
    fn relabeled_canonical_points_self_test(a in canonical_strategy(), r in relabeling_strategy()) {
        prop_assume!(a.degenerate_count(1e-6) == 0);
        let p = r.apply(&a.correlators());
        prop_assert!(classify(&p, TOL).is_self_testing());
        let (_, q) = canonicalize(&p, TOL).unwrap();
        prop_assert!(condition_residual(&q, 0, 1, 1) <= TOL);
        prop_assert!(angles_from_correlations(&q).canonical_residual() <= 1e-8);
    }

    #[test]
    fn chsh_value_is_relabeling_invariant(e in prop::array::uniform4(-1.0..1.0f64), r in relabeling_strategy()) {
        let p = CorrelationPoint::from_flat(e).unwrap();
        let q = r.apply(&p);
        prop_assert!((chsh_max(&p) - chsh_max(&q)).abs() <= 1e-12);
        let f = p.correlators();
        prop_assert!((chsh_max(&p) - brute_chsh([&f[0], &f[1]])).abs() <= 1e-12);
        prop_assert_eq!(r.inverse().apply(&q), p);
    }

    #[test]
    fn quantum_points_obey_tsirelson(a in canonical_strategy()) {
        prop_assert!(chsh_max(&a.correlators()) <= 2.0 * SQRT_2 + 1e-12);
    }

    #[test]
    fn generic_points_do_not_self_test(e in prop::array::uniform4(-0.99..0.99f64)) {
        let p = CorrelationPoint::from_flat(e).unwrap();
        let on_boundary = (0..2).any(|i| (0..2).any(|j| [1i8, -1].iter().any(|&xi| condition_residual(&p, i, j, xi) <= TOL)));
        prop_assert_eq!(classify(&p, TOL).is_self_testing(), on_boundary);
    }
}
