mod common;

use moduli::lie_core::{ad, build_algebra, cybe_residual, pair, r_matrix, reality_residual, weyl_normalize, RSign};
use moduli::linalg::{random_antisymmetric, random_sl, random_su, random_su_algebra, CMat};
use moduli::ModuliError;
use proptest::prelude::*;

fn traceless(m: CMat) -> CMat {
    let n = m.nrows();
    let tr = m.trace() / n as f64;
    m - CMat::identity(n, n) * tr
}

#[test]
fn compact_basis_is_orthonormal_and_spans() {
    for n in 2..=5 {
        let alg = build_algebra(n).unwrap();
        assert_eq!(alg.compact_basis.len(), n * n - 1);
        assert_eq!(alg.real_basis.len(), 2 * (n * n - 1));
        for (a, x) in alg.compact_basis.iter().enumerate() {
            assert!((x + x.adjoint()).norm() < 1e-14 && x.trace().norm() < 1e-14);
            for (b, y) in alg.compact_basis.iter().enumerate() {
                let want = if a == b { 1.0 } else { 0.0 };
                assert!((pair(x, y).re - want).abs() < 1e-13 && pair(x, y).im.abs() < 1e-13);
            }
        }
    }
}

#[test]
fn rank_one_is_rejected() {
    assert!(matches!(build_algebra(1), Err(ModuliError::InvalidRank(1))));
}

#[test]
fn weyl_normalize_rejects_trace_and_walls() {
    assert!(matches!(weyl_normalize(&[1.0, 0.5]), Err(ModuliError::InvalidSpectrum(_))));
    assert!(matches!(weyl_normalize(&[0.5, 0.5, -1.0]), Err(ModuliError::BoundaryOrbit)));
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn coordinates_round_trip(n in 2usize..5, seed in any::<u64>()) {
        let alg = build_algebra(n).unwrap();
        let mut r = common::rng(seed);
        let x = random_su_algebra(n, &mut r);
        prop_assert!((alg.from_compact_coords(&alg.compact_coords(&x)) - &x).norm() < 1e-12);
        let z = traceless(random_sl(n, &mut r));
        prop_assert!((alg.from_coords(&alg.coords(&z)) - &z).norm() < 1e-12 * (1.0 + z.norm()));
    }

    #[test]
    fn pairing_is_invariant(n in 2usize..5, seed in any::<u64>()) {
        let mut r = common::rng(seed);
        let g = random_sl(n, &mut r);
        let x = traceless(random_sl(n, &mut r));
        let y = traceless(random_sl(n, &mut r));
        let lhs = pair(&ad(&g, &x), &ad(&g, &y));
        let rhs = pair(&x, &y);
        prop_assert!((lhs - rhs).norm() < 1e-9 * (1.0 + rhs.norm() * g.norm().powi(4)));
        let k = random_su(n, &mut r);
        prop_assert!((ad(&k, &x) - &k * &x * k.adjoint()).norm() < 1e-12 * (1.0 + x.norm()));
    }

    #[test]
    fn weyl_normalize_sorts_and_ignores_order(v in prop::collection::vec(-3.0f64..3.0, 2..6)) {
        let mean = v.iter().sum::<f64>() / v.len() as f64;
        let theta: Vec<f64> = v.iter().map(|x| x - mean).collect();
        let mut rev = theta.clone();
        rev.reverse();
        match (weyl_normalize(&theta), weyl_normalize(&rev)) {
            (Ok(a), Ok(b)) => {
                prop_assert_eq!(&a, &b);
                prop_assert!(a.theta.windows(2).all(|w| w[0] > w[1]));
            }
            (Err(_), Err(_)) => {}
            _ => prop_assert!(false, "order changed the verdict"),
        }
    }

    #[test]
    fn r_matrices_solve_cybe_and_are_conjugate(n in 2usize..5, t in -2.0f64..2.0, seed in any::<u64>()) {
        let alg = build_algebra(n).unwrap();
        let u = random_antisymmetric(n - 1, &mut common::rng(seed));
        let plus = r_matrix(&alg, t, &u, RSign::Plus).unwrap();
        let minus = r_matrix(&alg, t, &u, RSign::Minus).unwrap();
        let scale = 1.0 + t * t;
        prop_assert!(cybe_residual(&alg, &plus) < 1e-11 * scale);
        prop_assert!(cybe_residual(&alg, &minus) < 1e-11 * scale);
        prop_assert!(reality_residual(&alg, &plus, &minus) < 1e-12 * scale);
    }
}
