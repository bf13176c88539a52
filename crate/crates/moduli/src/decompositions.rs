//! Group-level Poisson-Lie machinery: Iwasawa factorization with the (t, u)
//! twist, the projections, the maps f and e, the dressing action,
//! Lu-Weinstein moment maps and finite-difference bracket evaluators.
//!
//! Factorizations: g = pi_L(g) pi*_R(g) = pi*_L(g) pi_R(g) with
//! pi_L, pi_R in K = SU(n) and pi*_L, pi*_R in K*_t(u).

use nalgebra::DMatrix;
use serde::{Deserialize, Serialize};

use crate::error::{ModuliError, Result};
use crate::lie_core::{r_matrix, validate_twist, AlgebraContext, RMatrix, RSign};
use crate::linalg::{c, cmat_serde, diag, expm, hermitian_eigen, inv, CMat, C64};

/// Default finite-difference step for bracket evaluators.
pub const FD_STEP: f64 = 1e-5;

/// Element of the dual group K*_t(u): upper triangular, det 1, with diagonal
/// exp(D (alpha + i U alpha)), where D maps Cartan coordinates to diagonal
/// entries and `cartan_log` = alpha.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct KStarElement {
    #[serde(with = "cmat_serde")]
    pub matrix: CMat,
    pub cartan_log: Vec<f64>,
}

/// Which of the three brackets an evaluator applies.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum BracketSpace {
    /// Sklyanin bracket on K.
    CompactGroup,
    /// Poisson-Lie bracket on K*.
    DualGroup,
    /// Heisenberg double structure on G.
    HeisenbergDouble,
}

/// Compact Poisson-Lie group SU(n) with deformation t and twist u, together
/// with its r-matrices.
#[derive(Debug, Clone)]
pub struct PoissonLie {
    pub alg: AlgebraContext,
    pub t: f64,
    pub u: DMatrix<f64>,
    pub r_plus: RMatrix,
    pub r_minus: RMatrix,
    /// D U D^T: maps log|diag| of an upper-triangular factor to its phases.
    phase_map: DMatrix<f64>,
}

impl PoissonLie {
    pub fn new(alg: AlgebraContext, t: f64, u: DMatrix<f64>) -> Result<Self> {
        validate_twist(&alg, &u)?;
        let r_plus = r_matrix(&alg, t, &u, RSign::Plus)?;
        let r_minus = r_matrix(&alg, t, &u, RSign::Minus)?;
        let d = &alg.cartan_diag;
        let phase_map = d * &u * d.transpose();
        Ok(Self { alg, t, u, r_plus, r_minus, phase_map })
    }

    pub fn n(&self) -> usize {
        self.alg.n
    }

    fn twist_phases(&self, log_modulus: &[f64]) -> Vec<f64> {
        let v = nalgebra::DVector::from_column_slice(log_modulus);
        (&self.phase_map * v).iter().copied().collect()
    }

    fn kstar_from_matrix(&self, m: CMat) -> KStarElement {
        let logs: Vec<f64> = (0..self.n()).map(|j| m[(j, j)].norm().ln()).collect();
        let alpha = self.alg.cartan_diag.transpose() * nalgebra::DVector::from_vec(logs);
        KStarElement { matrix: m, cartan_log: alpha.iter().copied().collect() }
    }

    /// Wrap an upper-triangular matrix as a K* element, checking the shape and
    /// the twisted diagonal condition.
    pub fn kstar(&self, m: CMat, tol: f64) -> Result<KStarElement> {
        let n = self.n();
        for i in 0..n {
            for j in 0..i {
                if m[(i, j)].norm() > tol {
                    return Err(ModuliError::GeometryError("K* element must be upper triangular".into()));
                }
            }
        }
        let res = self.phase_residual(&m);
        if res > tol {
            return Err(ModuliError::GeometryError(format!("K* diagonal condition violated ({res:.2e})")));
        }
        Ok(self.kstar_from_matrix(m))
    }

    /// Residual of the K*_t(u) diagonal condition: phases of the diagonal
    /// must equal D U D^T log|diag|.
    pub fn phase_residual(&self, m: &CMat) -> f64 {
        let n = self.n();
        let logs: Vec<f64> = (0..n).map(|j| m[(j, j)].norm().ln()).collect();
        let phases = self.twist_phases(&logs);
        (0..n)
            .map(|j| {
                let want = C64::from_polar(m[(j, j)].norm(), phases[j]);
                (m[(j, j)] - want).norm() / m[(j, j)].norm().max(1e-300)
            })
            .fold(0.0, f64::max)
    }

    /// Iwasawa factorization g = k k* (k unitary, k* in K*_t(u)).
    pub fn iwasawa(&self, g: &CMat) -> (CMat, KStarElement) {
        let n = self.n();
        let qr = g.clone().qr();
        let (mut q, mut r) = (qr.q(), qr.r());
        for j in 0..n {
            let d = r[(j, j)];
            let ph = d / d.norm();
            for i in 0..n {
                q[(i, j)] *= ph;
            }
            for k in 0..n {
                r[(j, k)] /= ph;
            }
        }
        let logs: Vec<f64> = (0..n).map(|j| r[(j, j)].re.ln()).collect();
        let phases = self.twist_phases(&logs);
        let p: Vec<C64> = phases.iter().map(|&f| C64::from_polar(1.0, f)).collect();
        let pinv: Vec<C64> = p.iter().map(|z| z.conj()).collect();
        let k = q * diag(&pinv);
        let ks = diag(&p) * r;
        (k, self.kstar_from_matrix(ks))
    }

    /// Mirrored factorization g = k* k, returned as (k*, k).
    pub fn iwasawa_mirrored(&self, g: &CMat) -> (KStarElement, CMat) {
        let (k, ks) = self.iwasawa(&inv(g));
        (self.kstar_from_matrix(inv(&ks.matrix)), inv(&k))
    }

    pub fn pi_l(&self, g: &CMat) -> CMat {
        self.iwasawa(g).0
    }

    pub fn pi_r_star(&self, g: &CMat) -> KStarElement {
        self.iwasawa(g).1
    }

    pub fn pi_l_star(&self, g: &CMat) -> KStarElement {
        self.iwasawa_mirrored(g).0
    }

    pub fn pi_r(&self, g: &CMat) -> CMat {
        self.iwasawa_mirrored(g).1
    }

    /// f(k*) = k* bar(k*), a Hermitian positive-definite matrix.
    pub fn f_map(&self, ks: &KStarElement) -> CMat {
        &ks.matrix * ks.matrix.adjoint()
    }

    /// Inverse of f: reverse Cholesky s = U U^dagger, then the twisted
    /// diagonal phase.
    pub fn f_inverse(&self, s: &CMat) -> Result<KStarElement> {
        let n = self.n();
        if (s - s.adjoint()).camax() > 1e-10 * s.camax().max(1.0) {
            return Err(ModuliError::InvalidSK);
        }
        if hermitian_eigen(s).0[0] <= 0.0 {
            return Err(ModuliError::InvalidSK);
        }
        let flip = |m: &CMat| CMat::from_fn(n, n, |i, j| m[(n - 1 - i, n - 1 - j)]);
        let chol = nalgebra::Cholesky::new(flip(s)).ok_or(ModuliError::InvalidSK)?;
        let up = flip(&chol.l());
        let logs: Vec<f64> = (0..n).map(|j| up[(j, j)].re.ln()).collect();
        let phases = self.twist_phases(&logs);
        let p: Vec<C64> = phases.iter().map(|&f| C64::from_polar(1.0, f)).collect();
        Ok(self.kstar_from_matrix(up * diag(&p)))
    }

    /// e(X) = f^{-1}(exp(2 i t X)) for X in k.
    pub fn e_map(&self, x: &CMat) -> Result<KStarElement> {
        self.f_inverse(&expm(&(x * c(0.0, 2.0 * self.t))))
    }

    /// Dressing action: k k* = rho* rho, returns (rho, rho*).
    pub fn dressing(&self, k: &CMat, ks: &KStarElement) -> (CMat, KStarElement) {
        let (rs, r) = self.iwasawa_mirrored(&(k * &ks.matrix));
        (r, rs)
    }

    /// AD*_k k*: the K* leg of the dressing action.
    pub fn dress(&self, k: &CMat, ks: &KStarElement) -> KStarElement {
        self.dressing(k, ks).1
    }

    /// Lu-Weinstein moment maps of the left and right K-actions on the
    /// double: m^L = pi*_L(g), m^R = pi*_R(g)^{-1}.
    pub fn moment_maps(&self, g: &CMat) -> (KStarElement, KStarElement) {
        let ml = self.pi_l_star(g);
        let mr = self.kstar_from_matrix(inv(&self.pi_r_star(g).matrix));
        (ml, mr)
    }

    /// Precomputed exponentials exp(+-h x_a) over the real basis.
    pub fn stencil(&self, h: f64) -> Stencil {
        Stencil::new(&self.alg, h)
    }

    /// Evaluate the Sklyanin bracket on K, on K* or on the Heisenberg double at `point` with FD
    /// gradients over the real basis.
    pub fn sklyanin_eval(
        &self,
        space: BracketSpace,
        psi: &dyn Fn(&CMat) -> f64,
        psi2: &dyn Fn(&CMat) -> f64,
        point: &CMat,
        stencil: &Stencil,
    ) -> Result<f64> {
        let (l1, r1) = stencil.gradients(psi, point)?;
        let (l2, r2) = stencil.gradients(psi2, point)?;
        let rp = &self.r_plus.tensor;
        let val = match space {
            BracketSpace::CompactGroup | BracketSpace::DualGroup => contract(&l1, rp, &l2) - contract(&r1, rp, &r2),
            BracketSpace::HeisenbergDouble => contract(&l1, rp, &l2) + contract(&r1, &self.r_minus.tensor, &r2),
        };
        if val.is_finite() {
            Ok(val)
        } else {
            Err(ModuliError::EvaluationError)
        }
    }
}

/// Bilinear contraction a^T M b.
pub fn contract(a: &[f64], m: &DMatrix<f64>, b: &[f64]) -> f64 {
    let mut s = 0.0;
    for (i, ai) in a.iter().enumerate() {
        if *ai == 0.0 {
            continue;
        }
        let mut row = 0.0;
        for (j, bj) in b.iter().enumerate() {
            row += m[(i, j)] * bj;
        }
        s += ai * row;
    }
    s
}

/// Central-difference stencil: exp(+-h x_a) for every real basis element.
#[derive(Debug, Clone)]
pub struct Stencil {
    pub h: f64,
    pub plus: Vec<CMat>,
    pub minus: Vec<CMat>,
}

impl Stencil {
    pub fn new(alg: &AlgebraContext, h: f64) -> Self {
        let plus = alg.real_basis.iter().map(|b| expm(&(b * c(h, 0.0)))).collect();
        let minus = alg.real_basis.iter().map(|b| expm(&(b * c(-h, 0.0)))).collect();
        Self { h, plus, minus }
    }

    /// Left and right FD gradients: d/ds psi(exp(s x_a) g), d/ds psi(g exp(s x_a)).
    pub fn gradients(&self, psi: &dyn Fn(&CMat) -> f64, g: &CMat) -> Result<(Vec<f64>, Vec<f64>)> {
        let mut left = Vec::with_capacity(self.plus.len());
        let mut right = Vec::with_capacity(self.plus.len());
        for (p, m) in self.plus.iter().zip(&self.minus) {
            let l = (psi(&(p * g)) - psi(&(m * g))) / (2.0 * self.h);
            let r = (psi(&(g * p)) - psi(&(g * m))) / (2.0 * self.h);
            if !l.is_finite() || !r.is_finite() {
                return Err(ModuliError::EvaluationError);
            }
            left.push(l);
            right.push(r);
        }
        Ok((left, right))
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::lie_core::build_algebra;
    use crate::linalg::{eye, random_antisymmetric, random_sl, random_su, real_diag};
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn setup(n: usize, seed: u64) -> (PoissonLie, ChaCha8Rng) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let u = random_antisymmetric(n - 1, &mut rng);
        (PoissonLie::new(build_algebra(n).unwrap(), 0.8, u).unwrap(), rng)
    }

    #[test]
    fn iwasawa_trivial_cases() {
        let (pl, mut rng) = setup(3, 1);
        let (k, ks) = pl.iwasawa(&eye(3));
        assert!((k - eye(3)).camax() < 1e-14 && (ks.matrix - eye(3)).camax() < 1e-14);
        let u = random_su(3, &mut rng);
        let (k, ks) = pl.iwasawa(&u);
        assert!((k - &u).camax() < 1e-13 && (ks.matrix - eye(3)).camax() < 1e-13);
    }

    #[test]
    fn iwasawa_reproduces_input() {
        let (pl, mut rng) = setup(3, 2);
        let g = random_sl(3, &mut rng);
        let (k, ks) = pl.iwasawa(&g);
        assert!((&k * &ks.matrix - &g).norm() < 1e-12 * g.norm());
        assert!((k.adjoint() * &k - eye(3)).camax() < 1e-13);
        assert!(pl.phase_residual(&ks.matrix) < 1e-12);
        let (ls, l) = pl.iwasawa_mirrored(&g);
        assert!((&ls.matrix * &l - &g).norm() < 1e-12 * g.norm());
    }

    #[test]
    fn f_of_diagonal() {
        let (pl, _) = setup(2, 3);
        let ks = pl.kstar(real_diag(&[2.0, 0.5]), 1e-12).unwrap();
        assert!((pl.f_map(&ks) - real_diag(&[4.0, 0.25])).camax() < 1e-14);
    }

    #[test]
    fn f_inverse_rejects_indefinite() {
        let (pl, _) = setup(2, 4);
        assert_eq!(pl.f_inverse(&real_diag(&[2.0, -0.5])).unwrap_err(), ModuliError::InvalidSK);
    }

    #[test]
    fn e_map_su2_diagonal() {
        let pl = PoissonLie::new(build_algebra(2).unwrap(), 0.7, DMatrix::zeros(1, 1)).unwrap();
        let th = 0.4;
        let x = real_diag(&[th, -th]) * c(0.0, 1.0);
        let e = pl.e_map(&x).unwrap();
        let want = real_diag(&[(-0.7 * th).exp(), (0.7 * th).exp()]);
        assert!((e.matrix - want).camax() < 1e-14);
    }

    #[test]
    fn bracket_of_constant_vanishes() {
        let (pl, mut rng) = setup(2, 5);
        let st = pl.stencil(FD_STEP);
        let g = random_sl(2, &mut rng);
        let v = pl.sklyanin_eval(BracketSpace::HeisenbergDouble, &|_| 1.0, &|m| m[(0, 1)].re, &g, &st).unwrap();
        assert_eq!(v, 0.0);
    }

    #[test]
    fn non_finite_function_is_reported() {
        let (pl, mut rng) = setup(2, 6);
        let st = pl.stencil(FD_STEP);
        let g = random_sl(2, &mut rng);
        let r = pl.sklyanin_eval(BracketSpace::DualGroup, &|_| f64::NAN, &|m| m[(0, 1)].re, &g, &st);
        assert_eq!(r.unwrap_err(), ModuliError::EvaluationError);
    }
}
