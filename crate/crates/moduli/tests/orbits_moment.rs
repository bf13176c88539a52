mod common;

use common::{jacobi, rng};
use moduli::decompositions::PoissonLie;
use moduli::lie_core::{build_algebra, pair, weyl_normalize, AlgebraContext, CartanVector};
use moduli::linalg::{c, comm, eye, random_su, random_su_algebra, CMat};
use moduli::orbits_moment::*;
use moduli::ModuliError;
use nalgebra::DMatrix;

fn cv(theta: &[f64]) -> CartanVector {
    weyl_normalize(theta).unwrap()
}

/// A feasible triple: spectra read off from X1, X2 and -(X1+X2).
fn feasible_triple(n: usize, seed: u64) -> [CartanVector; 3] {
    let mut r = rng(seed);
    let x1 = random_su_algebra(n, &mut r);
    let x2 = random_su_algebra(n, &mut r);
    let x3 = -(&x1 + &x2);
    [cv(&orbit_spectrum(&x1)), cv(&orbit_spectrum(&x2)), cv(&orbit_spectrum(&x3))]
}

fn max_diff(a: &CMat, b: &CMat) -> f64 {
    (a - b).camax()
}

#[test]
fn orbit_spectrum_is_preserved_under_random_conjugation() {
    let h = cv(&[0.7, 0.1, -0.8]);
    for s in 0..100 {
        let p = sample_orbit(&h, s).unwrap();
        let spec = orbit_spectrum(&p.x);
        for (a, b) in spec.iter().zip(&h.theta) {
            assert!((a - b).abs() < 1e-10);
        }
    }
}

#[test]
fn kk_bracket_of_casimir_vanishes() {
    let alg = build_algebra(3).unwrap();
    let mut r = rng(3);
    for _ in 0..10 {
        let p = random_su_algebra(3, &mut r);
        let y = random_su_algebra(3, &mut r);
        let cas = |x: &CMat| pair(x, x).re;
        let lin = |x: &CMat| pair(x, &(&y * &y * c(0.0, 1.0))).re + (x * x * x).trace().im;
        assert!(kk_bracket(&alg, &cas, &lin, &p, 1e-5).unwrap().abs() < 1e-8);
    }
}

#[test]
fn kk_bracket_matches_closed_form_quadratic_gradients() {
    let alg = build_algebra(3).unwrap();
    let mut r = rng(5);
    for _ in 0..20 {
        let (y, z, y2, z2, p) = (
            random_su_algebra(3, &mut r),
            random_su_algebra(3, &mut r),
            random_su_algebra(3, &mut r),
            random_su_algebra(3, &mut r),
            random_su_algebra(3, &mut r),
        );
        let f = |x: &CMat| pair(x, &y).re * pair(x, &z).re;
        let g = |x: &CMat| pair(x, &y2).re * pair(x, &z2).re;
        let gf = &y * c(pair(&p, &z).re, 0.0) + &z * c(pair(&p, &y).re, 0.0);
        let gg = &y2 * c(pair(&p, &z2).re, 0.0) + &z2 * c(pair(&p, &y2).re, 0.0);
        let exact = pair(&p, &comm(&gf, &gg)).re;
        let got = kk_bracket(&alg, &f, &g, &p, 1e-4).unwrap();
        assert!((got - exact).abs() <= 1e-6 * exact.abs().max(1.0), "{got} vs {exact}");
    }
}

#[test]
fn kk_bracket_is_antisymmetric_leibniz_and_jacobi() {
    let alg = build_algebra(2).unwrap();
    let mut r = rng(8);
    let bracket = |h: f64| {
        let alg = alg.clone();
        move |f: &dyn Fn(&CMat) -> f64, g: &dyn Fn(&CMat) -> f64, p: &CMat| kk_bracket(&alg, f, g, p, h).unwrap()
    };
    let outer = bracket(1e-3);
    let inner = bracket(1e-4);
    for _ in 0..10 {
        let p = random_su_algebra(2, &mut r);
        let (a, b, d) = (random_su_algebra(2, &mut r), random_su_algebra(2, &mut r), random_su_algebra(2, &mut r));
        let f = |x: &CMat| (x * &a * x).trace().re;
        let g = |x: &CMat| pair(x, &b).re.sin();
        let h = |x: &CMat| (x * &d).trace().im * (x * x).trace().re;
        let fg = kk_bracket(&alg, &f, &g, &p, 1e-5).unwrap();
        let gf = kk_bracket(&alg, &g, &f, &p, 1e-5).unwrap();
        assert!((fg + gf).abs() < 1e-9);
        let gh = |x: &CMat| g(x) * h(x);
        let lhs = kk_bracket(&alg, &f, &gh, &p, 1e-5).unwrap();
        let rhs =
            kk_bracket(&alg, &f, &g, &p, 1e-5).unwrap() * h(&p) + g(&p) * kk_bracket(&alg, &f, &h, &p, 1e-5).unwrap();
        assert!((lhs - rhs).abs() < 1e-6 * (1.0 + lhs.abs()));
        assert!(jacobi(&outer, &inner, &f, &g, &h, &p).abs() < 1e-3);
    }
}

#[test]
fn zero_level_solution_is_consistent_and_deterministic() {
    let alg = build_algebra(3).unwrap();
    let hs = feasible_triple(3, 11);
    let opts = SolverOptions::default();
    let sol = solve_moment_zero(&alg, &hs, 4, &opts).unwrap();
    assert!(sol.residual <= 1e-10);
    assert!((recompute_residual(&sol) - sol.residual).abs() < 1e-12);
    for (x, h) in sol.points.iter().zip(&hs) {
        for (a, b) in orbit_spectrum(x).iter().zip(&h.theta) {
            assert!((a - b).abs() < 1e-10);
        }
    }
    let again = solve_moment_zero(&alg, &hs, 4, &opts).unwrap();
    assert_eq!(serde_json::to_string(&sol).unwrap(), serde_json::to_string(&again).unwrap());
}

#[test]
fn solution_json_round_trips() {
    let alg = build_algebra(2).unwrap();
    let h = cv(&[0.3, -0.3]);
    let sol = solve_moment_zero(&alg, &[h.clone(), h.clone(), h], 2, &SolverOptions::default()).unwrap();
    let back: MomentSolution = serde_json::from_str(&serde_json::to_string(&sol).unwrap()).unwrap();
    assert_eq!(back.points, sol.points);
    assert_eq!(back.level, Level::Zero);
}

#[test]
fn boundary_spectra_are_rejected_by_solver() {
    let alg = build_algebra(3).unwrap();
    let bad = CartanVector { theta: vec![0.2, 0.2, -0.4] };
    let good = cv(&[0.5, 0.0, -0.5]);
    let err = solve_moment_zero(&alg, &[bad, good.clone(), good], 1, &SolverOptions::default()).unwrap_err();
    assert_eq!(err, ModuliError::BoundaryOrbit);
}

#[test]
fn diagonal_coadjoint_action_preserves_spectra_and_level() {
    let alg = build_algebra(3).unwrap();
    let sol = solve_moment_zero(&alg, &feasible_triple(3, 2), 1, &SolverOptions::default()).unwrap();
    let mut r = rng(7);
    for _ in 0..20 {
        let k = random_su(3, &mut r);
        let moved = diagonal_coadjoint(&k, &sol.points);
        let s = &moved[0] + &moved[1] + &moved[2];
        assert!(s.norm() < 1e-9);
        for (a, b) in moved.iter().zip(&sol.points) {
            for (x, y) in orbit_spectrum(a).iter().zip(orbit_spectrum(b)) {
                assert!((x - y).abs() < 1e-10);
            }
        }
    }
}

fn pl(n: usize, t: f64) -> PoissonLie {
    let alg = build_algebra(n).unwrap();
    let u = DMatrix::zeros(n - 1, n - 1);
    PoissonLie::new(alg, t, u).unwrap()
}

fn twisted_pl(t: f64) -> PoissonLie {
    let alg = build_algebra(3).unwrap();
    let u = DMatrix::from_row_slice(2, 2, &[0.0, 0.4, -0.4, 0.0]);
    PoissonLie::new(alg, t, u).unwrap()
}

#[test]
fn kstar_level_small_t_continuation() {
    let alg = build_algebra(3).unwrap();
    let hs = feasible_triple(3, 21);
    assert!(solve_moment_zero(&alg, &hs, 1, &SolverOptions::default()).is_ok());
    let g = pl(3, 0.05);
    let sol = solve_moment_kstar(&g, &hs, 1, &SolverOptions::default()).unwrap();
    assert!(sol.residual <= 1e-10);
    assert!((recompute_residual(&sol) - sol.residual).abs() < 1e-10);
    for (ks, h) in sol.kstars(&g).iter().zip(&hs) {
        assert!(dressing_membership_residual(&g, ks, h) < 1e-9);
    }
}

#[test]
fn kstar_level_infeasible_su2() {
    let g = pl(2, 0.05);
    let hs = [cv(&[1.0, -1.0]), cv(&[0.2, -0.2]), cv(&[0.2, -0.2])];
    assert!(matches!(solve_moment_kstar(&g, &hs, 1, &SolverOptions::default()), Err(ModuliError::NoSolution { .. })));
}

#[test]
fn diagonal_dressing_preserves_the_level_set() {
    let g = twisted_pl(0.3);
    let hs = feasible_triple(3, 31);
    let sol = solve_moment_kstar(&g, &hs, 3, &SolverOptions::default()).unwrap();
    let ks = sol.kstars(&g);
    let mut r = rng(12);
    for _ in 0..100 {
        let k = random_su(3, &mut r);
        let moved = diagonal_dressing(&g, &k, &ks);
        let prod = &moved[0].matrix * &moved[1].matrix * &moved[2].matrix;
        assert!((prod - eye(3)).norm() <= 1e-9);
        for (m, h) in moved.iter().zip(&hs) {
            assert!(dressing_membership_residual(&g, m, h) < 1e-9);
        }
    }
}

fn normal_form_distance(a: &MomentSolution, b: &MomentSolution) -> f64 {
    a.points.iter().zip(&b.points).map(|(x, y)| max_diff(x, y)).fold(0.0, f64::max)
}

#[test]
fn gauge_fix_normal_form_zero_level() {
    let alg = build_algebra(3).unwrap();
    let hs = feasible_triple(3, 41);
    let sol = solve_moment_zero(&alg, &hs, 1, &SolverOptions::default()).unwrap();
    let fixed = gauge_fix(&alg, None, &sol).unwrap();
    assert!(max_diff(&fixed.points[0], &hs[0].element()) < 1e-12);
    for j in 0..2 {
        let e = fixed.points[1][(j, j + 1)];
        assert!(e.im.abs() < 1e-12 && e.re >= 0.0);
    }
    let twice = gauge_fix(&alg, None, &fixed).unwrap();
    assert!(normal_form_distance(&fixed, &twice) < 1e-12);
    let mut r = rng(2);
    for _ in 0..10 {
        let k = random_su(3, &mut r);
        let mut moved = sol.clone();
        moved.points = diagonal_coadjoint(&k, &sol.points);
        let f2 = gauge_fix(&alg, None, &moved).unwrap();
        assert!(normal_form_distance(&fixed, &f2) < 1e-9);
    }
}

#[test]
fn gauge_fix_normal_form_dual_level() {
    let g = twisted_pl(0.4);
    let hs = feasible_triple(3, 43);
    let sol = solve_moment_kstar(&g, &hs, 1, &SolverOptions::default()).unwrap();
    let fixed = gauge_fix(&g.alg, Some(&g), &sol).unwrap();
    let e1 = g.e_map(&hs[0].element()).unwrap();
    assert!(max_diff(&fixed.points[0], &e1.matrix) < 1e-9);
    let mut r = rng(4);
    for _ in 0..5 {
        let k = random_su(3, &mut r);
        let mut moved = sol.clone();
        moved.points = diagonal_dressing(&g, &k, &sol.kstars(&g)).into_iter().map(|e| e.matrix).collect();
        let f2 = gauge_fix(&g.alg, Some(&g), &moved).unwrap();
        assert!(normal_form_distance(&fixed, &f2) < 1e-9);
    }
}

#[test]
fn su2_solutions_share_one_normal_form() {
    let alg = build_algebra(2).unwrap();
    let hs = [cv(&[0.5, -0.5]), cv(&[0.4, -0.4]), cv(&[0.3, -0.3])];
    let forms: Vec<_> = (0..6)
        .map(|s| gauge_fix(&alg, None, &solve_moment_zero(&alg, &hs, s, &SolverOptions::default()).unwrap()).unwrap())
        .collect();
    for f in &forms[1..] {
        assert!(normal_form_distance(&forms[0], f) < 1e-9);
    }
}

#[test]
fn gauge_fix_flags_reducible_solutions() {
    let alg = build_algebra(3).unwrap();
    // Block-diagonal triple: a U(1) stabilizer survives.
    let hs = [cv(&[0.5, 0.1, -0.6]), cv(&[0.3, -0.1, -0.2]), cv(&[0.3, 0.0, -0.3])];
    let x = |h: &CartanVector| h.element();
    let sol = MomentSolution {
        level: Level::Zero,
        thetas: hs.iter().map(|h| h.theta.clone()).collect(),
        t: 0.0,
        u: vec![],
        points: vec![x(&hs[0]), x(&hs[1]), -(x(&hs[0]) + x(&hs[1]))],
        witnesses: vec![eye(3); 3],
        residual: 0.0,
        regularity_rank: 0,
    };
    assert!(matches!(gauge_fix(&alg, None, &sol), Err(ModuliError::NonRegular(_))));
}

fn rank_of(alg: &AlgebraContext, hs: &[CartanVector; 3]) -> usize {
    let sol = solve_moment_zero(alg, hs, 1, &SolverOptions::default()).unwrap();
    let r = tangent_rank(alg, None, &sol).unwrap();
    let fixed = gauge_fix(alg, None, &sol).unwrap();
    assert_eq!(tangent_rank(alg, None, &fixed).unwrap(), r);
    r
}

#[test]
fn reduced_dimension_matches_dim_k_minus_three_rank() {
    let a2 = build_algebra(2).unwrap();
    let a3 = build_algebra(3).unwrap();
    for s in 0..3 {
        assert_eq!(rank_of(&a2, &feasible_triple(2, 50 + s)), 0);
        assert_eq!(rank_of(&a3, &feasible_triple(3, 60 + s)), 2);
    }
}

#[test]
fn reduced_dimension_on_the_dual_level() {
    let g = twisted_pl(0.3);
    let sol = solve_moment_kstar(&g, &feasible_triple(3, 71), 1, &SolverOptions::default()).unwrap();
    assert_eq!(tangent_rank(&g.alg, Some(&g), &sol).unwrap(), 2);
}
