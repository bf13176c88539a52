//! Coadjoint orbits O_0(H), dressing orbits O_t(H), the Kirillov-Kostant
//! bracket, the diagonal actions and solvers for the moment-map level sets
//! defining the multiplicity spaces M_0(H1,H2,H3) and M_t(H1,H2,H3).

use nalgebra::{DMatrix, DVector};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::decompositions::{KStarElement, PoissonLie};
use crate::error::{ModuliError, Result};
use crate::lie_core::{pair, weyl_normalize, AlgebraContext, CartanVector};
use crate::linalg::{c, comm, expm, eye, hermitian_eigen, random_su, zeros, CMat, C64};

/// Point X = Ad_k I(H) of a coadjoint orbit.
#[derive(Debug, Clone)]
pub struct OrbitPoint {
    pub x: CMat,
    pub h: CartanVector,
    pub witness: Option<CMat>,
}

/// Point of a dressing orbit O_t(H) in K*.
#[derive(Debug, Clone)]
pub struct DressingOrbitPoint {
    pub kstar: KStarElement,
    pub h: CartanVector,
    pub t: f64,
}

pub fn check_generic(h: &CartanVector) -> Result<()> {
    weyl_normalize(&h.theta).map(|_| ())
}

pub fn orbit_point(h: &CartanVector, k: &CMat) -> Result<OrbitPoint> {
    check_generic(h)?;
    Ok(OrbitPoint { x: k * h.element() * k.adjoint(), h: h.clone(), witness: Some(k.clone()) })
}

/// Haar-uniform orbit point, deterministic in `seed`.
pub fn sample_orbit(h: &CartanVector, seed: u64) -> Result<OrbitPoint> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let k = random_su(h.n(), &mut rng);
    orbit_point(h, &k)
}

pub fn dressing_orbit_point(pl: &PoissonLie, h: &CartanVector, k: &CMat) -> Result<DressingOrbitPoint> {
    check_generic(h)?;
    let e = pl.e_map(&h.element())?;
    Ok(DressingOrbitPoint { kstar: pl.dress(k, &e), h: h.clone(), t: pl.t })
}

/// Spectrum of -iX, sorted descending.
pub fn orbit_spectrum(x: &CMat) -> Vec<f64> {
    let mut v = hermitian_eigen(&(x * c(0.0, -1.0))).0;
    v.reverse();
    v
}

/// Max deviation between the spectrum of f(k*) and that of exp(2itH).
pub fn dressing_membership_residual(pl: &PoissonLie, ks: &KStarElement, h: &CartanVector) -> f64 {
    let mut got = hermitian_eigen(&pl.f_map(ks)).0;
    let mut want: Vec<f64> = h.theta.iter().map(|th| (-2.0 * pl.t * th).exp()).collect();
    got.sort_by(f64::total_cmp);
    want.sort_by(f64::total_cmp);
    got.iter().zip(&want).map(|(a, b)| (a - b).abs()).fold(0.0, f64::max)
}

/// FD gradient of a complex-valued function of several k-valued arguments,
/// returned as one complex combination of the compact basis per argument.
pub fn kk_gradients(alg: &AlgebraContext, psi: &dyn Fn(&[CMat]) -> C64, points: &[CMat], h: f64) -> Result<Vec<CMat>> {
    let mut out = Vec::with_capacity(points.len());
    for i in 0..points.len() {
        let mut grad = zeros(alg.n);
        for t in &alg.compact_basis {
            let mut p = points.to_vec();
            p[i] = &points[i] + t * c(h, 0.0);
            let fp = psi(&p);
            p[i] = &points[i] - t * c(h, 0.0);
            let fm = psi(&p);
            let d = (fp - fm) / (2.0 * h);
            if !d.re.is_finite() || !d.im.is_finite() {
                return Err(ModuliError::EvaluationError);
            }
            grad += t * d;
        }
        out.push(grad);
    }
    Ok(out)
}

/// Kirillov-Kostant bracket on a product of copies of k:
/// sum_i <P_i, [grad_i psi, grad_i psi']>, complex-bilinear in the functions.
pub fn kk_bracket_complex(
    alg: &AlgebraContext,
    psi: &dyn Fn(&[CMat]) -> C64,
    psi2: &dyn Fn(&[CMat]) -> C64,
    points: &[CMat],
    h: f64,
) -> Result<C64> {
    let g1 = kk_gradients(alg, psi, points, h)?;
    let g2 = kk_gradients(alg, psi2, points, h)?;
    Ok(points.iter().zip(g1.iter().zip(&g2)).map(|(p, (a, b))| pair(p, &comm(a, b))).sum())
}

/// Real Kirillov-Kostant bracket at a single point P of k.
pub fn kk_bracket(
    alg: &AlgebraContext,
    psi: &dyn Fn(&CMat) -> f64,
    psi2: &dyn Fn(&CMat) -> f64,
    p: &CMat,
    h: f64,
) -> Result<f64> {
    let f = |x: &[CMat]| c(psi(&x[0]), 0.0);
    let g = |x: &[CMat]| c(psi2(&x[0]), 0.0);
    Ok(kk_bracket_complex(alg, &f, &g, std::slice::from_ref(p), h)?.re)
}

/// Which moment-map level a solution lives on.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Level {
    /// X1 + X2 + X3 = 0 on coadjoint orbits.
    Zero,
    /// k*1 k*2 k*3 = e on dressing orbits.
    KStar,
}

/// A point of the moment-map level set together with its witnesses k_i.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct MomentSolution {
    pub level: Level,
    pub thetas: Vec<Vec<f64>>,
    pub t: f64,
    pub u: Vec<Vec<f64>>,
    /// X_i (zero level) or k*_i matrices (dual level).
    #[serde(with = "mats_serde")]
    pub points: Vec<CMat>,
    #[serde(with = "mats_serde")]
    pub witnesses: Vec<CMat>,
    pub residual: f64,
    pub regularity_rank: usize,
}

mod mats_serde {
    use super::*;
    use serde::{Deserializer, Serializer};

    pub fn serialize<S: Serializer>(m: &[CMat], s: S) -> std::result::Result<S::Ok, S::Error> {
        let v: Vec<_> = m.iter().map(crate::linalg::to_json_rows).collect();
        v.serialize(s)
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> std::result::Result<Vec<CMat>, D::Error> {
        let v = Vec::<Vec<Vec<[f64; 2]>>>::deserialize(d)?;
        v.iter()
            .map(|r| crate::linalg::from_json_rows(r).ok_or_else(|| serde::de::Error::custom("ragged matrix")))
            .collect()
    }
}

impl MomentSolution {
    pub fn cartan(&self) -> Vec<CartanVector> {
        self.thetas.iter().map(|t| CartanVector { theta: t.clone() }).collect()
    }

    pub fn kstars(&self, pl: &PoissonLie) -> Vec<KStarElement> {
        self.points.iter().map(|m| pl.kstar(m.clone(), 1e-6).expect("solution points lie in K*")).collect()
    }
}

#[derive(Debug, Clone)]
pub struct SolverOptions {
    pub restarts: usize,
    pub tol: f64,
    pub gd_iters: usize,
    pub gn_iters: usize,
    /// Best residual above which NoSolution is reported.
    pub no_solution_threshold: f64,
}

impl Default for SolverOptions {
    fn default() -> Self {
        Self { restarts: 32, tol: 1e-10, gd_iters: 300, gn_iters: 40, no_solution_threshold: 1e-4 }
    }
}

/// Diagonal coadjoint action on a triple: X_i -> Ad_k X_i.
pub fn diagonal_coadjoint(k: &CMat, xs: &[CMat]) -> Vec<CMat> {
    xs.iter().map(|x| k * x * k.adjoint()).collect()
}

/// Diagonal dressing action on a triple of K* elements: the dressing of
/// k*_i is by the K-leg left over from dressing the previous factors, so
/// that the product k*_1 k*_2 k*_3 is dressed as a whole.
pub fn diagonal_dressing(pl: &PoissonLie, k: &CMat, ks: &[KStarElement]) -> Vec<KStarElement> {
    let mut rho = k.clone();
    let mut out = Vec::with_capacity(ks.len());
    for x in ks {
        let (r, rs) = pl.dressing(&rho, x);
        out.push(rs);
        rho = r;
    }
    out
}

/// Residual evaluation and Jacobian (w.r.t. left perturbations exp(Y) k_i of
/// the free witnesses) for a level-set problem.
trait LevelProblem {
    fn n(&self) -> usize;
    fn free(&self) -> usize;
    fn residual(&self, ks: &[CMat]) -> DVector<f64>;
    fn jacobian(&self, ks: &[CMat]) -> DMatrix<f64>;
}

struct ZeroProblem<'a> {
    alg: &'a AlgebraContext,
    hs: Vec<CMat>,
}

impl ZeroProblem<'_> {
    fn xs(&self, ks: &[CMat]) -> Vec<CMat> {
        let mut xs = vec![self.hs[0].clone()];
        for (k, h) in ks.iter().zip(&self.hs[1..]) {
            xs.push(k * h * k.adjoint());
        }
        xs
    }
}

impl LevelProblem for ZeroProblem<'_> {
    fn n(&self) -> usize {
        self.alg.n
    }

    fn free(&self) -> usize {
        2
    }

    fn residual(&self, ks: &[CMat]) -> DVector<f64> {
        let xs = self.xs(ks);
        DVector::from_vec(self.alg.compact_coords(&(&xs[0] + &xs[1] + &xs[2])))
    }

    fn jacobian(&self, ks: &[CMat]) -> DMatrix<f64> {
        let xs = self.xs(ks);
        let d = self.alg.dim_k();
        let mut j = DMatrix::zeros(d, 2 * d);
        for i in 0..2 {
            for (a, t) in self.alg.compact_basis.iter().enumerate() {
                let col = self.alg.compact_coords(&comm(t, &xs[i + 1]));
                for (r, v) in col.into_iter().enumerate() {
                    j[(r, i * d + a)] = v;
                }
            }
        }
        j
    }
}

struct KStarProblem<'a> {
    pl: &'a PoissonLie,
    es: Vec<KStarElement>,
}

impl KStarProblem<'_> {
    fn kstars(&self, ks: &[CMat]) -> Vec<KStarElement> {
        let mut out = vec![self.es[0].clone()];
        for (k, e) in ks.iter().zip(&self.es[1..]) {
            out.push(self.pl.dress(k, e));
        }
        out
    }

    fn product(&self, ks: &[CMat]) -> CMat {
        let v = self.kstars(ks);
        &v[0].matrix * &v[1].matrix * &v[2].matrix
    }
}

fn real_vec(m: &CMat) -> Vec<f64> {
    m.iter().flat_map(|z| [z.re, z.im]).collect()
}

impl LevelProblem for KStarProblem<'_> {
    fn n(&self) -> usize {
        self.pl.n()
    }

    fn free(&self) -> usize {
        2
    }

    fn residual(&self, ks: &[CMat]) -> DVector<f64> {
        let n = self.n();
        DVector::from_vec(real_vec(&(self.product(ks) - eye(n))))
    }

    fn jacobian(&self, ks: &[CMat]) -> DMatrix<f64> {
        let alg = &self.pl.alg;
        let d = alg.dim_k();
        let h = 1e-6;
        let rows = 2 * self.n() * self.n();
        let mut j = DMatrix::zeros(rows, 2 * d);
        for i in 0..2 {
            for (a, t) in alg.compact_basis.iter().enumerate() {
                let mut kp = ks.to_vec();
                kp[i] = expm(&(t * c(h, 0.0))) * &ks[i];
                let fp = real_vec(&self.product(&kp));
                kp[i] = expm(&(t * c(-h, 0.0))) * &ks[i];
                let fm = real_vec(&self.product(&kp));
                for r in 0..rows {
                    j[(r, i * d + a)] = (fp[r] - fm[r]) / (2.0 * h);
                }
            }
        }
        j
    }
}

/// Apply the step Y (coordinates over the compact basis, one block per free
/// witness) as k_i -> exp(Y_i) k_i.
fn retract(alg: &AlgebraContext, ks: &[CMat], y: &DVector<f64>) -> Vec<CMat> {
    let d = alg.dim_k();
    ks.iter().enumerate().map(|(i, k)| expm(&alg.from_compact_coords(&y.as_slice()[i * d..(i + 1) * d])) * k).collect()
}

/// One restart: gradient descent with Armijo backtracking, then Gauss-Newton
/// least-norm polishing. Returns witnesses and the final residual norm.
fn descend(alg: &AlgebraContext, prob: &dyn LevelProblem, mut ks: Vec<CMat>, opts: &SolverOptions) -> (Vec<CMat>, f64) {
    let obj = |ks: &[CMat]| prob.residual(ks).norm_squared();
    let mut f = obj(&ks);
    let mut step = 1.0;
    let mut stalled = false;
    for _ in 0..opts.gd_iters {
        if f.sqrt() < 1e-3 {
            break;
        }
        let g = prob.jacobian(&ks).transpose() * prob.residual(&ks);
        let gn2 = g.norm_squared();
        if gn2 < 1e-24 {
            break;
        }
        step *= 2.0;
        let f_prev = f;
        loop {
            let trial = retract(alg, &ks, &(&g * (-step)));
            let ft = obj(&trial);
            if ft <= f - 0.5 * step * gn2 {
                ks = trial;
                f = ft;
                break;
            }
            step *= 0.5;
            if step < 1e-12 {
                break;
            }
        }
        // Stalled away from zero: a minimum of the residual that is not a
        // solution. Further descent only burns iterations.
        if step < 1e-12 || f >= f_prev * (1.0 - 1e-12) {
            stalled = true;
            break;
        }
    }
    if stalled && f.sqrt() >= 1e-3 {
        return (ks, f.sqrt());
    }
    for _ in 0..opts.gn_iters {
        let r = prob.residual(&ks);
        if r.norm() < opts.tol * 1e-3 {
            break;
        }
        let j = prob.jacobian(&ks);
        let svd = j.svd(true, true);
        let cutoff = 1e-7 * svd.singular_values.max();
        let Ok(dy) = svd.solve(&(-&r), cutoff) else { break };
        // Damped step: halve until the objective decreases.
        let mut scale = 1.0;
        let mut improved = false;
        while scale > 1e-3 {
            let trial = retract(alg, &ks, &(&dy * scale));
            let ft = obj(&trial);
            if ft < f {
                ks = trial;
                f = ft;
                improved = true;
                break;
            }
            scale *= 0.5;
        }
        if !improved {
            break;
        }
    }
    (ks, f.sqrt())
}

fn run_restarts(alg: &AlgebraContext, prob: &dyn LevelProblem, seed: u64, opts: &SolverOptions) -> (Vec<CMat>, f64) {
    let n = prob.n();
    let mut best: Option<(Vec<CMat>, f64)> = None;
    for trial in 0..opts.restarts {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        rng.set_stream(trial as u64);
        let init: Vec<CMat> = (0..prob.free()).map(|_| random_su(n, &mut rng)).collect();
        let (ks, res) = descend(alg, prob, init, opts);
        if best.as_ref().is_none_or(|b| res < b.1) {
            best = Some((ks, res));
        }
        if res <= opts.tol {
            break;
        }
    }
    best.expect("at least one restart")
}

fn thetas_of(hs: &[CartanVector]) -> Vec<Vec<f64>> {
    hs.iter().map(|h| h.theta.clone()).collect()
}

fn u_rows(u: &DMatrix<f64>) -> Vec<Vec<f64>> {
    (0..u.nrows()).map(|i| u.row(i).iter().copied().collect()).collect()
}

/// Solve X1 + X2 + X3 = 0 with X_i on the orbit of I(H_i); k_1 is fixed to
/// the identity (this uses up part of the diagonal K-freedom).
pub fn solve_moment_zero(
    alg: &AlgebraContext,
    hs: &[CartanVector; 3],
    seed: u64,
    opts: &SolverOptions,
) -> Result<MomentSolution> {
    for h in hs {
        check_generic(h)?;
    }
    let prob = ZeroProblem { alg, hs: hs.iter().map(|h| h.element()).collect() };
    let (ks, res) = run_restarts(alg, &prob, seed, opts);
    if res > opts.no_solution_threshold {
        return Err(ModuliError::NoSolution { best_residual: res });
    }
    let mut witnesses = vec![eye(alg.n)];
    witnesses.extend(ks.iter().cloned());
    let points = prob.xs(&ks);
    let mut sol = MomentSolution {
        level: Level::Zero,
        thetas: thetas_of(hs),
        t: 0.0,
        u: vec![],
        points,
        witnesses,
        residual: res,
        regularity_rank: 0,
    };
    sol.regularity_rank = action_rank(alg, &sol.points);
    Ok(sol)
}

/// Solve k*_1 k*_2 k*_3 = e with k*_i on the dressing orbit of e(I(H_i)).
pub fn solve_moment_kstar(
    pl: &PoissonLie,
    hs: &[CartanVector; 3],
    seed: u64,
    opts: &SolverOptions,
) -> Result<MomentSolution> {
    for h in hs {
        check_generic(h)?;
    }
    let es = hs.iter().map(|h| pl.e_map(&h.element())).collect::<Result<Vec<_>>>()?;
    let prob = KStarProblem { pl, es };
    let (ks, res) = run_restarts(&pl.alg, &prob, seed, opts);
    if res > opts.no_solution_threshold {
        return Err(ModuliError::NoSolution { best_residual: res });
    }
    let mut witnesses = vec![eye(pl.n())];
    witnesses.extend(ks.iter().cloned());
    let points = prob.kstars(&ks).into_iter().map(|k| k.matrix).collect();
    let mut sol = MomentSolution {
        level: Level::KStar,
        thetas: thetas_of(hs),
        t: pl.t,
        u: u_rows(&pl.u),
        points,
        witnesses,
        residual: res,
        regularity_rank: 0,
    };
    sol.regularity_rank = kstar_action_rank(pl, &sol);
    Ok(sol)
}

/// Residual recomputed from the stored points.
pub fn recompute_residual(sol: &MomentSolution) -> f64 {
    let n = sol.points[0].nrows();
    match sol.level {
        Level::Zero => {
            let s = &sol.points[0] + &sol.points[1] + &sol.points[2];
            (-(&s * &s).trace()).re.max(0.0).sqrt()
        }
        Level::KStar => (&sol.points[0] * &sol.points[1] * &sol.points[2] - eye(n)).norm(),
    }
}

fn svd_values(m: &DMatrix<f64>) -> Vec<f64> {
    let mut v: Vec<f64> = m.clone().svd(false, false).singular_values.iter().copied().collect();
    v.sort_by(|a, b| b.total_cmp(a));
    v
}

fn numeric_rank(sv: &[f64], threshold: f64) -> usize {
    sv.iter().filter(|&&s| s > threshold).count()
}

/// Matrix of the infinitesimal diagonal action Z -> ([Z, X_i])_i.
fn stabilizer_matrix(alg: &AlgebraContext, xs: &[CMat]) -> DMatrix<f64> {
    let d = alg.dim_k();
    let mut m = DMatrix::zeros(d * xs.len(), d);
    for (a, t) in alg.compact_basis.iter().enumerate() {
        for (i, x) in xs.iter().enumerate() {
            for (r, v) in alg.compact_coords(&comm(t, x)).into_iter().enumerate() {
                m[(i * d + r, a)] = v;
            }
        }
    }
    m
}

fn action_rank(alg: &AlgebraContext, xs: &[CMat]) -> usize {
    numeric_rank(&svd_values(&stabilizer_matrix(alg, xs)), RANK_THRESHOLD)
}

/// FD matrix of the diagonal dressing action on a K* triple.
fn kstar_action_matrix(pl: &PoissonLie, ks: &[KStarElement]) -> DMatrix<f64> {
    let alg = &pl.alg;
    let n = pl.n();
    let d = alg.dim_k();
    let h = 1e-6;
    let flat = |v: &[KStarElement]| -> Vec<f64> { v.iter().flat_map(|k| real_vec(&k.matrix)).collect() };
    let mut m = DMatrix::zeros(ks.len() * 2 * n * n, d);
    for (a, t) in alg.compact_basis.iter().enumerate() {
        let fp = flat(&diagonal_dressing(pl, &expm(&(t * c(h, 0.0))), ks));
        let fm = flat(&diagonal_dressing(pl, &expm(&(t * c(-h, 0.0))), ks));
        for r in 0..fp.len() {
            m[(r, a)] = (fp[r] - fm[r]) / (2.0 * h);
        }
    }
    m
}

fn kstar_action_rank(pl: &PoissonLie, sol: &MomentSolution) -> usize {
    let ks = sol.kstars(pl);
    numeric_rank(&svd_values(&kstar_action_matrix(pl, &ks)), 1e-6)
}

/// SVD threshold for numerical ranks.
pub const RANK_THRESHOLD: f64 = 1e-8;
/// Smallest admissible singular value of the stabilizer equation.
pub const REGULARITY_THRESHOLD: f64 = 1e-6;

/// Bring a solution to normal form: X1 = I(H1) (resp. k*1 = e(I(H1))), and
/// the residual torus fixed by making the superdiagonal entries of the second
/// point real and nonnegative. Idempotent.
pub fn gauge_fix(alg: &AlgebraContext, pl: Option<&PoissonLie>, sol: &MomentSolution) -> Result<MomentSolution> {
    let n = alg.n;
    match sol.level {
        Level::Zero => {
            let sv = svd_values(&stabilizer_matrix(alg, &sol.points));
            let smin = *sv.last().expect("nonempty");
            if smin < REGULARITY_THRESHOLD {
                return Err(ModuliError::NonRegular(smin));
            }
        }
        Level::KStar => {
            let pl = pl.ok_or_else(|| ModuliError::SchemaError("dual-level gauge fix needs the group".into()))?;
            let sv = svd_values(&kstar_action_matrix(pl, &sol.kstars(pl)));
            let smin = *sv.last().expect("nonempty");
            if smin < REGULARITY_THRESHOLD {
                return Err(ModuliError::NonRegular(smin));
            }
        }
    }
    // Unitary k0 diagonalizing the first point in the chamber order.
    let first = match sol.level {
        Level::Zero => &sol.points[0] * c(0.0, -1.0),
        Level::KStar => {
            let pl = pl.expect("checked above");
            let ks = sol.kstars(pl);
            // f(k*) has eigenvalues exp(-2 t theta); order by -log / (2t).
            crate::linalg::log_hpd(&pl.f_map(&ks[0])) * c(-1.0 / (2.0 * pl.t), 0.0)
        }
    };
    let (_, v) = hermitian_eigen(&first);
    // hermitian_eigen is ascending; reverse columns for descending theta.
    let mut vd = zeros(n);
    for j in 0..n {
        vd.set_column(j, &v.column(n - 1 - j));
    }
    let mut k0 = vd.adjoint();
    let det = k0.determinant();
    k0 /= det.powf(1.0 / n as f64);

    let apply = |k: &CMat, s: &MomentSolution| -> MomentSolution {
        let mut out = s.clone();
        match s.level {
            Level::Zero => out.points = diagonal_coadjoint(k, &s.points),
            Level::KStar => {
                let pl = pl.expect("checked above");
                out.points = diagonal_dressing(pl, k, &s.kstars(pl)).into_iter().map(|e| e.matrix).collect();
            }
        }
        out.witnesses = s.witnesses.iter().map(|w| k * w).collect();
        out
    };
    let mut fixed = apply(&k0, sol);
    // Clean the first point to its exact normal form.
    let phases: Vec<f64> = {
        let x2 = &fixed.points[1];
        let mut ph = vec![0.0; n];
        for j in 0..n - 1 {
            ph[j + 1] = ph[j] + x2[(j, j + 1)].arg();
        }
        ph
    };
    let mean = phases.iter().sum::<f64>() / n as f64;
    let torus = crate::linalg::diag(&phases.iter().map(|p| C64::from_polar(1.0, p - mean)).collect::<Vec<_>>());
    fixed = apply(&torus, &fixed);
    Ok(fixed)
}

/// Dimension of the reduced space at a regular solution:
/// rank(orbit tangent) - rank(moment differential) - rank(action).
pub fn tangent_rank(alg: &AlgebraContext, pl: Option<&PoissonLie>, sol: &MomentSolution) -> Result<usize> {
    let (m, cmat, dmat, thr) = match sol.level {
        Level::Zero => zero_level_differentials(alg, &sol.points),
        Level::KStar => {
            let pl = pl.ok_or_else(|| ModuliError::SchemaError("dual-level rank needs the group".into()))?;
            kstar_level_differentials(pl, sol)
        }
    };
    let (sm, sc, sd) = (svd_values(&m), svd_values(&cmat), svd_values(&dmat));
    if let Some(&s) = sd.last() {
        if s < REGULARITY_THRESHOLD {
            return Err(ModuliError::NonRegular(s));
        }
    }
    for s in sm.iter().chain(&sc) {
        if *s > thr * 1e-2 && *s < thr * 1e2 {
            return Err(ModuliError::IllConditioned(*s));
        }
    }
    let rm = numeric_rank(&sm, thr);
    let rc = numeric_rank(&sc, thr);
    let rd = numeric_rank(&sd, thr);
    Ok(rm.saturating_sub(rc + rd))
}

type Differentials = (DMatrix<f64>, DMatrix<f64>, DMatrix<f64>, f64);

fn zero_level_differentials(alg: &AlgebraContext, xs: &[CMat]) -> Differentials {
    let d = alg.dim_k();
    let k = xs.len();
    let mut m = DMatrix::zeros(d * k, d * k);
    let mut cm = DMatrix::zeros(d, d * k);
    for (i, x) in xs.iter().enumerate() {
        for (a, t) in alg.compact_basis.iter().enumerate() {
            for (r, v) in alg.compact_coords(&comm(t, x)).into_iter().enumerate() {
                m[(i * d + r, i * d + a)] = v;
                cm[(r, i * d + a)] = v;
            }
        }
    }
    (m, cm, stabilizer_matrix(alg, xs), RANK_THRESHOLD)
}

fn kstar_level_differentials(pl: &PoissonLie, sol: &MomentSolution) -> Differentials {
    let alg = &pl.alg;
    let n = pl.n();
    let d = alg.dim_k();
    let ks = sol.kstars(pl);
    let h = 1e-6;
    let blk = 2 * n * n;
    let mut m = DMatrix::zeros(3 * blk, 3 * d);
    let mut cm = DMatrix::zeros(blk, 3 * d);
    for i in 0..3 {
        for (a, t) in alg.compact_basis.iter().enumerate() {
            let dp = pl.dress(&expm(&(t * c(h, 0.0))), &ks[i]).matrix;
            let dm = pl.dress(&expm(&(t * c(-h, 0.0))), &ks[i]).matrix;
            let col = real_vec(&((&dp - &dm) / c(2.0 * h, 0.0)));
            for (r, v) in col.iter().enumerate() {
                m[(i * blk + r, i * d + a)] = *v;
            }
            let prod = |x: &CMat| -> CMat {
                let mut v: Vec<CMat> = ks.iter().map(|k| k.matrix.clone()).collect();
                v[i] = x.clone();
                &v[0] * &v[1] * &v[2]
            };
            let pc = real_vec(&((prod(&dp) - prod(&dm)) / c(2.0 * h, 0.0)));
            for (r, v) in pc.iter().enumerate() {
                cm[(r, i * d + a)] = *v;
            }
        }
    }
    // The product k*1 k*2 k*3 lives in the (dim k)-dimensional group K*, so
    // its differential is measured at FD accuracy.
    (m, cm, kstar_action_matrix(pl, &ks), 1e-6)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::lie_core::build_algebra;

    #[test]
    fn orbit_point_at_identity_is_cartan_element() {
        let h = weyl_normalize(&[0.5, -0.1, -0.4]).unwrap();
        let p = orbit_point(&h, &eye(3)).unwrap();
        assert!((p.x - h.element()).camax() == 0.0);
    }

    #[test]
    fn sampling_is_seed_deterministic() {
        let h = weyl_normalize(&[0.5, -0.1, -0.4]).unwrap();
        assert_eq!(sample_orbit(&h, 9).unwrap().x, sample_orbit(&h, 9).unwrap().x);
    }

    #[test]
    fn boundary_orbits_are_rejected() {
        let h = CartanVector { theta: vec![0.1, 0.1, -0.2] };
        assert_eq!(orbit_point(&h, &eye(3)).unwrap_err(), ModuliError::BoundaryOrbit);
    }

    #[test]
    fn linear_functions_give_structure_constants() {
        let alg = build_algebra(3).unwrap();
        let (y, y2, p) = (&alg.compact_basis[0], &alg.compact_basis[3], &alg.compact_basis[6]);
        let f = |x: &CMat| pair(x, y).re;
        let g = |x: &CMat| pair(x, y2).re;
        let v = kk_bracket(&alg, &f, &g, p, 1e-5).unwrap();
        assert!((v - pair(p, &comm(y, y2)).re).abs() < 1e-10);
    }

    #[test]
    fn equilateral_su2_is_solvable() {
        let alg = build_algebra(2).unwrap();
        let h = weyl_normalize(&[0.3, -0.3]).unwrap();
        let sol = solve_moment_zero(&alg, &[h.clone(), h.clone(), h], 1, &SolverOptions::default()).unwrap();
        assert!(sol.residual <= 1e-10);
        assert!((recompute_residual(&sol) - sol.residual).abs() < 1e-12);
    }

    #[test]
    fn triangle_violation_has_no_solution() {
        let alg = build_algebra(2).unwrap();
        let hs = [
            weyl_normalize(&[1.0, -1.0]).unwrap(),
            weyl_normalize(&[0.2, -0.2]).unwrap(),
            weyl_normalize(&[0.2, -0.2]).unwrap(),
        ];
        assert!(matches!(
            solve_moment_zero(&alg, &hs, 1, &SolverOptions::default()),
            Err(ModuliError::NoSolution { .. })
        ));
    }
}
