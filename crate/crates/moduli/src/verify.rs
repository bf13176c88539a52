//! Verification suites: each suite measures one family of identities over
//! seeded random samples and reports the worst residual against a pinned
//! tolerance. The suites back both the acceptance tests and `verify` in the
//! command-line runner.

use std::collections::BTreeMap;
use std::time::Instant;

use nalgebra::DMatrix;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::decompositions::{BracketSpace, PoissonLie, Stencil};
use crate::graph_poisson::{
    chi_map, fr_bracket, fr_vs_kstar, goldman_comparison, intersecting_pairs, pants_graph, GraphConnection,
};
use crate::holonomy::{
    generator_holonomies, hole_conjugacy_check, sigma_check, word_holonomy, xi_map, Catalogue, RationalConnection,
};
use crate::lie_core::{build_algebra, cybe_residual, r_matrix, reality_residual, weyl_normalize, CartanVector, RSign};
use crate::linalg::{c, eye, random_antisymmetric, random_sl, random_su, random_su_algebra, CMat};
use crate::orbits_moment::{
    dressing_membership_residual, gauge_fix, kk_bracket, orbit_spectrum, solve_moment_kstar, solve_moment_zero,
    tangent_rank, MomentSolution, SolverOptions,
};
use crate::{ModuliError, Result};

/// Names of the available suites, in report order.
pub const SUITES: [&str; 9] =
    ["iwasawa", "r_matrix", "e_map", "xi_geometry", "goldman", "chi", "dimension", "axioms", "solver_grid"];

/// Contours on which the reality symmetry of holonomies is checked.
pub const SIGMA_CONTOURS: [&str; 5] = ["eight", "eight_rev", "double_a", "wide_loop", "big_eight"];

/// Knobs shared by all suites.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct SuiteConfig {
    /// Ranks to sweep (suites pinned to su(2) ignore this).
    pub ns: Vec<usize>,
    /// Deformation parameter used by the holonomy and dual-group suites.
    pub t: f64,
    pub seed: u64,
    pub ode_tol: f64,
    pub fd_step: f64,
    /// Number of gauge-fixed moment-map solutions per rank.
    pub solutions: usize,
    /// Per-check tolerance overrides, keyed by check name.
    #[serde(default)]
    pub thresholds: BTreeMap<String, f64>,
}

impl Default for SuiteConfig {
    fn default() -> Self {
        Self {
            ns: vec![2, 3],
            t: 1.0,
            seed: 2024,
            ode_tol: 1e-10,
            fd_step: 1e-5,
            solutions: 20,
            thresholds: BTreeMap::new(),
        }
    }
}

/// One measured quantity against its tolerance.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Check {
    pub name: String,
    pub residual: f64,
    pub tolerance: f64,
    pub passed: bool,
    pub samples: usize,
}

impl SuiteConfig {
    fn check(&self, name: &str, residual: f64, tolerance: f64, samples: usize) -> Check {
        let tolerance = self.thresholds.get(name).copied().unwrap_or(tolerance);
        Check { name: name.into(), residual, tolerance, passed: residual <= tolerance, samples }
    }

    fn rng(&self, salt: u64) -> ChaCha8Rng {
        let mut r = ChaCha8Rng::seed_from_u64(self.seed);
        r.set_stream(salt);
        r
    }
}

/// Result of one suite: its checks and wall time.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct SuiteResult {
    pub suite: String,
    pub checks: Vec<Check>,
    pub seconds: f64,
}

impl SuiteResult {
    pub fn passed(&self) -> bool {
        self.checks.iter().all(|c| c.passed)
    }
}

/// Run a suite by name.
pub fn run_suite(name: &str, cfg: &SuiteConfig) -> Result<SuiteResult> {
    let start = Instant::now();
    let checks = match name {
        "iwasawa" => iwasawa_suite(cfg)?,
        "r_matrix" => r_matrix_suite(cfg)?,
        "e_map" => e_map_suite(cfg)?,
        "xi_geometry" => xi_geometry_suite(cfg)?,
        "goldman" => goldman_suite(cfg)?,
        "chi" => chi_suite(cfg)?,
        "dimension" => dimension_suite(cfg)?,
        "axioms" => axioms_suite(cfg)?,
        "solver_grid" => solver_grid_suite(cfg)?,
        other => return Err(ModuliError::SchemaError(format!("unknown suite `{other}`"))),
    };
    Ok(SuiteResult { suite: name.into(), checks, seconds: start.elapsed().as_secs_f64() })
}

fn random_pl(n: usize, r: &mut ChaCha8Rng) -> Result<PoissonLie> {
    let t = r.random_range(0.2..1.5) * if r.random::<bool>() { 1.0 } else { -1.0 };
    PoissonLie::new(build_algebra(n)?, t, random_antisymmetric(n - 1, r))
}

fn fmax(a: f64, b: f64) -> f64 {
    if a.is_nan() || b.is_nan() {
        f64::NAN
    } else {
        a.max(b)
    }
}

fn iwasawa_suite(cfg: &SuiteConfig) -> Result<Vec<Check>> {
    let (mut fact, mut unit, mut phase, mut count) = (0.0f64, 0.0f64, 0.0f64, 0);
    for &n in &cfg.ns {
        let mut r = cfg.rng(100 + n as u64);
        for _ in 0..1000 {
            let p = random_pl(n, &mut r)?;
            let g = random_sl(n, &mut r);
            let (k, ks) = p.iwasawa(&g);
            fact = fmax(fact, (&k * &ks.matrix - &g).norm() / g.norm());
            unit = fmax(unit, (k.adjoint() * &k - eye(n)).norm());
            phase = fmax(phase, p.phase_residual(&ks.matrix));
            count += 1;
        }
    }
    Ok(vec![
        cfg.check("iwasawa.factorization", fact, 1e-11, count),
        cfg.check("iwasawa.unitarity", unit, 1e-12, count),
        cfg.check("iwasawa.phase", phase, 1e-10, count),
    ])
}

fn r_matrix_suite(cfg: &SuiteConfig) -> Result<Vec<Check>> {
    let (mut cybe, mut real, mut count) = (0.0f64, 0.0f64, 0);
    for &n in &cfg.ns {
        let mut r = cfg.rng(200 + n as u64);
        let alg = build_algebra(n)?;
        for _ in 0..10 {
            let t = r.random_range(0.2..1.5);
            let u = random_antisymmetric(n - 1, &mut r);
            let plus = r_matrix(&alg, t, &u, RSign::Plus)?;
            let minus = r_matrix(&alg, t, &u, RSign::Minus)?;
            cybe = fmax(cybe, fmax(cybe_residual(&alg, &plus), cybe_residual(&alg, &minus)));
            real = fmax(real, reality_residual(&alg, &plus, &minus));
            count += 1;
        }
    }
    Ok(vec![cfg.check("r_matrix.cybe", cybe, 1e-12, count), cfg.check("r_matrix.reality", real, 1e-12, count)])
}

fn e_map_suite(cfg: &SuiteConfig) -> Result<Vec<Check>> {
    let (mut equi, mut round, mut count) = (0.0f64, 0.0f64, 0);
    for &n in &cfg.ns {
        let mut r = cfg.rng(300 + n as u64);
        for _ in 0..200 {
            let p = random_pl(n, &mut r)?;
            let k = random_su(n, &mut r);
            // Unit-scale X keeps exp(2itX) well conditioned: the comparison
            // measures equivariance, not the conditioning of f^-1.
            let x = random_su_algebra(n, &mut r);
            let x = &x * c(r.random_range(0.2..1.0) / x.norm(), 0.0);
            let lhs = p.dress(&k, &p.e_map(&x)?);
            let rhs = p.e_map(&(&k * &x * k.adjoint()))?;
            equi = fmax(equi, (lhs.matrix - &rhs.matrix).norm() / rhs.matrix.norm());
            let ks = p.pi_r_star(&random_sl(n, &mut r));
            let back = p.f_inverse(&p.f_map(&ks))?;
            round = fmax(round, (back.matrix - &ks.matrix).norm() / ks.matrix.norm());
            count += 1;
        }
    }
    Ok(vec![cfg.check("e_map.equivariance", equi, 1e-9, count), cfg.check("e_map.f_roundtrip", round, 1e-11, count)])
}

/// Gauge-fixed zero-level solutions for random feasible spectra of
/// moderate size, as (solution, spectra).
pub fn moment_solutions(n: usize, cfg: &SuiteConfig) -> Result<Vec<(MomentSolution, [CartanVector; 3])>> {
    let alg = build_algebra(n)?;
    let mut r = cfg.rng(400 + n as u64);
    let specs: Vec<[CartanVector; 3]> =
        (0..cfg.solutions).map(|_| random_spectra(n, &mut r, 0.25)).collect::<Result<_>>()?;
    specs
        .into_par_iter()
        .enumerate()
        .map(|(i, hs)| {
            let sol = solve_moment_zero(&alg, &hs, cfg.seed.wrapping_add(i as u64), &SolverOptions::default())?;
            Ok((gauge_fix(&alg, None, &sol)?, hs))
        })
        .collect()
}

/// Spectra of X1, X2, -(X1 + X2) for random X_i of Frobenius scale `size`.
pub fn random_spectra(n: usize, r: &mut ChaCha8Rng, size: f64) -> Result<[CartanVector; 3]> {
    let x1 = random_su_algebra(n, r) * c(size, 0.0);
    let x2 = random_su_algebra(n, r) * c(size, 0.0);
    let x3 = -(&x1 + &x2);
    Ok([
        weyl_normalize(&orbit_spectrum(&x1))?,
        weyl_normalize(&orbit_spectrum(&x2))?,
        weyl_normalize(&orbit_spectrum(&x3))?,
    ])
}

fn connection(sol: &MomentSolution, t: f64) -> Result<RationalConnection> {
    xi_map(&sol.points[0], &sol.points[1], &sol.points[2], t)
}

fn xi_geometry_suite(cfg: &SuiteConfig) -> Result<Vec<Check>> {
    let cat = Catalogue::builtin();
    let word: Vec<String> = ["g1", "g2", "g3"].iter().map(|s| s.to_string()).collect();
    let mut rows = Vec::new();
    for &n in &cfg.ns {
        let sols = moment_solutions(n, cfg)?;
        let part: Vec<Result<[f64; 4]>> = sols
            .par_iter()
            .map(|(sol, hs)| {
                let conn = connection(sol, cfg.t)?;
                let mut sigma = 0.0f64;
                for name in SIGMA_CONTOURS {
                    sigma = fmax(sigma, sigma_check(&conn, cat.get(name)?, cfg.ode_tol)?);
                }
                let (mut spec, mut nonhyp) = (0.0f64, 0.0);
                for j in 1..=3 {
                    match hole_conjugacy_check(&conn, j, &hs[j - 1], cfg.t, cfg.ode_tol) {
                        Ok(rep) => {
                            spec = fmax(spec, rep.max_deviation);
                            if !rep.hyperbolic {
                                nonhyp += 1.0;
                            }
                        }
                        Err(ModuliError::SpectralMismatch(d)) => {
                            spec = fmax(spec, d);
                            nonhyp += 1.0;
                        }
                        Err(e) => return Err(e),
                    }
                }
                let gens = generator_holonomies(&conn, cfg.ode_tol)?;
                let prod = (word_holonomy(&gens, &word)? - eye(n)).norm();
                Ok([sigma, spec, prod, nonhyp])
            })
            .collect();
        for p in part {
            rows.push(p?);
        }
    }
    let col = |i: usize| rows.iter().map(|r| r[i]).fold(0.0, fmax);
    let nonhyp: f64 = rows.iter().map(|r| r[3]).sum();
    let m = rows.len();
    Ok(vec![
        cfg.check("xi_geometry.sigma", col(0), 1e-9, m * SIGMA_CONTOURS.len()),
        cfg.check("xi_geometry.hole_spectra", col(1), 1e-7, m * 3),
        cfg.check("xi_geometry.product_identity", col(2), 1e-8, m),
        cfg.check("xi_geometry.non_hyperbolic_holes", nonhyp, 0.0, m * 3),
    ])
}

fn goldman_suite(cfg: &SuiteConfig) -> Result<Vec<Check>> {
    let cat = Catalogue::builtin();
    let pairs = intersecting_pairs(cat);
    let (mut rel, mut gap, mut count) = (0.0f64, 0.0f64, 0);
    for &n in &cfg.ns {
        let alg = build_algebra(n)?;
        let sols = moment_solutions(n, cfg)?;
        let part: Vec<Result<(f64, f64)>> = sols
            .par_iter()
            .map(|(sol, _)| {
                let conn = connection(sol, cfg.t)?;
                let (mut rel, mut gap) = (0.0f64, 0.0f64);
                for (a, b) in &pairs {
                    let cmp = goldman_comparison(&alg, &conn, cat, a, b, cfg.fd_step, cfg.ode_tol)?;
                    rel = fmax(rel, cmp.rel_err);
                    gap = fmax(gap, cmp.form_gap);
                }
                Ok((rel, gap))
            })
            .collect();
        for p in part {
            let (r, g) = p?;
            rel = fmax(rel, r);
            gap = fmax(gap, g);
            count += pairs.len();
        }
    }
    let few = if pairs.len() >= 5 { 0.0 } else { (5 - pairs.len()) as f64 };
    Ok(vec![
        cfg.check("goldman.kk_vs_intersection_sum", rel, 1e-4, count),
        cfg.check("goldman.trace_vs_casimir_form", gap, 1e-8, count),
        cfg.check("goldman.missing_pairs", few, 0.0, pairs.len()),
    ])
}

type KFn = Box<dyn Fn(&[CMat]) -> f64 + Send + Sync>;

/// Test-function pairs on K*^3 used to compare brackets through chi.
pub fn kstar_test_pairs() -> Vec<(KFn, KFn)> {
    let e = |i: usize, a: usize, b: usize, im: bool| -> KFn {
        Box::new(move |k: &[CMat]| if im { k[i][(a, b)].im } else { k[i][(a, b)].re })
    };
    vec![
        (e(0, 0, 1, false), e(0, 0, 0, false)),
        (e(0, 0, 1, true), e(0, 1, 1, false)),
        (e(0, 0, 1, false), e(1, 0, 1, false)),
        (e(1, 0, 1, true), e(2, 0, 1, false)),
        (Box::new(|k: &[CMat]| (&k[0] * &k[1])[(0, 1)].re), Box::new(|k: &[CMat]| (&k[1] * &k[2])[(0, 1)].im)),
        (
            Box::new(|k: &[CMat]| (&k[0] * &k[1] * &k[2])[(0, 1)].re),
            Box::new(|k: &[CMat]| k[1][(0, 0)].re * k[2][(0, 1)].re),
        ),
    ]
}

fn chi_suite(cfg: &SuiteConfig) -> Result<Vec<Check>> {
    let fig = pants_graph();
    let (mut prod, mut memb, mut fr, mut count, mut fr_count) = (0.0f64, 0.0f64, 0.0f64, 0, 0);
    for &n in &cfg.ns {
        let mut r = cfg.rng(600 + n as u64);
        let pl = PoissonLie::new(build_algebra(n)?, cfg.t, random_antisymmetric(n - 1, &mut r) * 0.5)?;
        let stencil = pl.stencil(cfg.fd_step);
        let sols = moment_solutions(n, cfg)?;
        for (i, (sol, hs)) in sols.iter().enumerate() {
            let conn = connection(sol, cfg.t)?;
            let a = fig.connection_from(&conn, cfg.ode_tol)?;
            let g = fig.g_triple(&conn, &a, cfg.ode_tol)?;
            let ks = chi_map(&pl, &g);
            prod = fmax(prod, (&ks[0].matrix * &ks[1].matrix * &ks[2].matrix - eye(n)).norm());
            for (k, h) in ks.iter().zip(hs) {
                memb = fmax(memb, dressing_membership_residual(&pl, k, h));
            }
            count += 1;
            if i < 2 {
                for (f, h) in kstar_test_pairs() {
                    let cmp = fr_vs_kstar(&fig, &pl, &stencil, &*f, &*h, &g)?;
                    fr = fmax(fr, cmp.rel_err);
                    fr_count += 1;
                }
            }
        }
    }
    Ok(vec![
        cfg.check("chi.product_identity", prod, 1e-8, count),
        cfg.check("chi.orbit_membership", memb, 1e-7, count * 3),
        cfg.check("chi.fr_vs_dual_bracket", fr, 1e-4, fr_count),
    ])
}

/// Expected dimension of the reduced space: dim K - 3 rank K.
pub fn expected_dimension(n: usize) -> usize {
    (n * n - 1) - 3 * (n - 1)
}

fn dimension_suite(cfg: &SuiteConfig) -> Result<Vec<Check>> {
    let (mut zero_bad, mut dual_bad, mut zero_n, mut dual_n) = (0.0, 0.0, 0, 0);
    for &n in &cfg.ns {
        let alg = build_algebra(n)?;
        let want = expected_dimension(n);
        let sols = moment_solutions(n, cfg)?;
        for (sol, _) in &sols {
            if tangent_rank(&alg, None, sol)? != want {
                zero_bad += 1.0;
            }
            zero_n += 1;
        }
        let mut r = cfg.rng(700 + n as u64);
        let pl = PoissonLie::new(alg.clone(), 0.3, random_antisymmetric(n - 1, &mut r) * 0.5)?;
        for (i, (_, hs)) in sols.iter().take(3).enumerate() {
            let sol = solve_moment_kstar(&pl, hs, cfg.seed.wrapping_add(i as u64), &SolverOptions::default())?;
            if tangent_rank(&alg, Some(&pl), &sol)? != want {
                dual_bad += 1.0;
            }
            dual_n += 1;
        }
    }
    Ok(vec![
        cfg.check("dimension.zero_level_mismatches", zero_bad, 0.0, zero_n),
        cfg.check("dimension.dual_level_mismatches", dual_bad, 0.0, dual_n),
    ])
}

type Fun<'a, P> = &'a dyn Fn(&P) -> f64;
type Bracket<'a, P> = &'a dyn Fn(Fun<P>, Fun<P>, &P) -> f64;

/// Jacobi residual with an outer bracket (coarse step) and a nested inner one.
fn jacobi<P: ?Sized>(outer: Bracket<P>, inner: Bracket<P>, f: Fun<P>, g: Fun<P>, h: Fun<P>, x: &P) -> f64 {
    let gh = |p: &P| inner(g, h, p);
    let hf = |p: &P| inner(h, f, p);
    let fg = |p: &P| inner(f, g, p);
    outer(f, &gh, x) + outer(g, &hf, x) + outer(h, &fg, x)
}

fn skew(ab: f64, ba: f64) -> f64 {
    (ab + ba).abs() / (1.0 + ab.abs())
}

fn axioms_suite(cfg: &SuiteConfig) -> Result<Vec<Check>> {
    let n = 2;
    let mut r = cfg.rng(800);
    let mut out = Vec::new();
    let (coarse_h, fine_h) = (1e-3, 1e-4);

    // Kirillov-Kostant on su(2).
    let alg = build_algebra(n)?;
    let (mut anti, mut jac) = (0.0f64, 0.0f64);
    for _ in 0..10 {
        let p = random_su_algebra(n, &mut r);
        let (a, b, d) = (random_su_algebra(n, &mut r), random_su_algebra(n, &mut r), random_su_algebra(n, &mut r));
        let f = |x: &CMat| (x * &a * x).trace().re;
        let g = |x: &CMat| (x * &b).trace().re.sin();
        let h = |x: &CMat| (x * &d).trace().im * (x * x).trace().re;
        let br = |step: f64| {
            let alg = &alg;
            move |u: Fun<CMat>, v: Fun<CMat>, x: &CMat| kk_bracket(alg, u, v, x, step).unwrap_or(f64::NAN)
        };
        let fg = kk_bracket(&alg, &f, &g, &p, cfg.fd_step)?;
        let gf = kk_bracket(&alg, &g, &f, &p, cfg.fd_step)?;
        anti = fmax(anti, skew(fg, gf));
        jac = fmax(jac, jacobi(&br(coarse_h), &br(fine_h), &f, &g, &h, &p).abs());
    }
    out.push(cfg.check("axioms.kk_antisymmetry", anti, 1e-7, 10));
    out.push(cfg.check("axioms.kk_jacobi", jac, 1e-3, 10));

    // Sklyanin-type brackets on K, K* and the double.
    let pl = PoissonLie::new(alg.clone(), 0.6, DMatrix::zeros(1, 1))?;
    let (coarse, fine, mid) =
        (Stencil::new(&alg, coarse_h), Stencil::new(&alg, fine_h), Stencil::new(&alg, cfg.fd_step));
    let entry = |i: usize, j: usize, im: bool| move |m: &CMat| if im { m[(i, j)].im } else { m[(i, j)].re };
    for (space, label) in [
        (BracketSpace::CompactGroup, "compact"),
        (BracketSpace::DualGroup, "dual"),
        (BracketSpace::HeisenbergDouble, "double"),
    ] {
        let (mut anti, mut jac) = (0.0f64, 0.0f64);
        for _ in 0..10 {
            let point = match space {
                BracketSpace::CompactGroup => random_su(n, &mut r),
                BracketSpace::DualGroup => pl.pi_r_star(&random_sl(n, &mut r)).matrix,
                BracketSpace::HeisenbergDouble => random_sl(n, &mut r),
            };
            let (f, g, h) = (entry(0, 1, false), entry(1, 0, true), entry(0, 0, false));
            let br = |st: &Stencil| {
                let (pl, st) = (&pl, st.clone());
                move |u: Fun<CMat>, v: Fun<CMat>, x: &CMat| pl.sklyanin_eval(space, u, v, x, &st).unwrap_or(f64::NAN)
            };
            let ab = pl.sklyanin_eval(space, &f, &g, &point, &mid)?;
            let ba = pl.sklyanin_eval(space, &g, &f, &point, &mid)?;
            anti = fmax(anti, skew(ab, ba));
            jac = fmax(jac, jacobi(&br(&coarse), &br(&fine), &f, &g, &h, &point).abs());
        }
        out.push(cfg.check(&format!("axioms.sklyanin_{label}_antisymmetry"), anti, 1e-7, 10));
        out.push(cfg.check(&format!("axioms.sklyanin_{label}_jacobi"), jac, 1e-3, 10));
    }

    // Fock-Rosly on the four-vertex graph.
    let graph = pants_graph().graph;
    let (mut anti, mut jac) = (0.0f64, 0.0f64);
    let ends = [(0, 0, 1, false), (3, 1, 0, true), (1, 0, 0, false), (4, 1, 1, true), (2, 0, 1, true)];
    for trial in 0..10 {
        let x: Vec<CMat> = (0..graph.edges.len()).map(|_| random_sl(n, &mut r)).collect();
        let e = |k: usize| {
            let (edge, i, j, im) = ends[(trial + k) % ends.len()];
            move |p: &Vec<CMat>| if im { p[edge][(i, j)].im } else { p[edge][(i, j)].re }
        };
        let (f, g, h) = (e(0), e(1), e(2));
        let br = |st: &Stencil| {
            let (graph, pl, st) = (&graph, &pl, st.clone());
            move |u: Fun<Vec<CMat>>, v: Fun<Vec<CMat>>, x: &Vec<CMat>| {
                let uu = |p: &[CMat]| u(&p.to_vec());
                let vv = |p: &[CMat]| v(&p.to_vec());
                fr_bracket(graph, &pl.r_plus, &st, &uu, &vv, &GraphConnection { a: x.clone() }).unwrap_or(f64::NAN)
            }
        };
        let ab = br(&mid)(&f, &g, &x);
        let ba = br(&mid)(&g, &f, &x);
        anti = fmax(anti, skew(ab, ba));
        jac = fmax(jac, jacobi(&br(&coarse), &br(&fine), &f, &g, &h, &x).abs());
    }
    out.push(cfg.check("axioms.fr_antisymmetry", anti, 1e-7, 10));
    out.push(cfg.check("axioms.fr_jacobi", jac, 1e-3, 10));
    Ok(out)
}

/// Grid values used by the su(2) feasibility sweep.
pub fn grid_values() -> Vec<f64> {
    (0..10).map(|k| 0.1 + 0.09 * (k as f64 + 0.5)).collect()
}

/// Triangle-inequality feasibility for su(2) orbit radii.
pub fn su2_feasible(v: [f64; 3]) -> bool {
    v[0] <= v[1] + v[2] && v[1] <= v[0] + v[2] && v[2] <= v[0] + v[1]
}

fn solver_grid_suite(cfg: &SuiteConfig) -> Result<Vec<Check>> {
    let alg = build_algebra(2)?;
    let vs = grid_values();
    let mut cases: Vec<[f64; 3]> = Vec::with_capacity(vs.len().pow(3));
    for &a in &vs {
        for &b in &vs {
            for &d in &vs {
                cases.push([a, b, d]);
            }
        }
    }
    let res: Vec<Result<(bool, f64)>> = cases
        .par_iter()
        .enumerate()
        .map(|(i, v)| {
            let hs =
                [weyl_normalize(&[v[0], -v[0]])?, weyl_normalize(&[v[1], -v[1]])?, weyl_normalize(&[v[2], -v[2]])?];
            let oracle = su2_feasible(*v);
            match solve_moment_zero(&alg, &hs, cfg.seed.wrapping_add(i as u64), &SolverOptions::default()) {
                Ok(sol) => Ok((oracle, if oracle { sol.residual } else { f64::INFINITY })),
                Err(ModuliError::NoSolution { .. }) => Ok((!oracle, 0.0)),
                Err(e) => Err(e),
            }
        })
        .collect();
    let (mut disagree, mut worst) = (0.0, 0.0f64);
    for r in res {
        let (agree, resid) = r?;
        if !agree {
            disagree += 1.0;
        }
        worst = fmax(worst, resid);
    }
    Ok(vec![
        cfg.check("solver_grid.oracle_disagreements", disagree, 0.0, cases.len()),
        cfg.check("solver_grid.feasible_residual", worst, 1e-10, cases.len()),
    ])
}
