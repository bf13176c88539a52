//! The real Lie algebra g = sl(n, C), its compact form k = su(n), the
//! invariant form, the bar anti-involution and the classical r-matrices.
//!
//! Conventions:
//! * `pair(X, Y) = -Tr(XY)`: complex-bilinear, positive definite on k.
//! * `compact_basis` is orthonormal for `pair`; `real_basis` is
//!   `compact_basis ++ i * compact_basis`, a basis of g over R.
//! * Real coordinates of X in `real_basis` are obtained from the Hermitian
//!   split X = K + i K' with K, K' in k.

use nalgebra::DMatrix;
use serde::{Deserialize, Serialize};

use crate::error::{ModuliError, Result};
use crate::linalg::{c, comm, elem, zeros, CMat, C64, I};

/// Tolerance used when validating user-supplied twists and spectra.
pub const INPUT_TOL: f64 = 1e-12;

/// Two spectral entries closer than this are treated as repeated.
pub const BOUNDARY_TOL: f64 = 1e-9;

/// Realization of g = sl(n, C) over R.
#[derive(Debug, Clone)]
pub struct AlgebraContext {
    pub n: usize,
    /// Anti-Hermitian traceless basis of k, orthonormal for `pair`.
    pub compact_basis: Vec<CMat>,
    /// `compact_basis` followed by `i * compact_basis`.
    pub real_basis: Vec<CMat>,
    /// Orthonormal basis of the diagonal Cartan subalgebra of k.
    pub cartan_basis: Vec<CMat>,
    /// Positive roots as index pairs (j, k), j < k; root generator E_jk.
    pub positive_roots: Vec<(usize, usize)>,
    /// Indices into `positive_roots` of the simple roots (j, j+1).
    pub simple_roots: Vec<usize>,
    /// Coroot generators h_j = i (E_jj - E_{j+1,j+1}).
    pub coroots: Vec<CMat>,
    /// Basis h^j dual to `coroots` under `pair`.
    pub dual_cartan: Vec<CMat>,
    /// Casimir coefficients over the compact basis: C = sum_ab casimir[a,b] t_a (x) t_b,
    /// with t^a the `pair`-dual basis. Identity for the orthonormal basis.
    pub casimir: DMatrix<f64>,
    /// Sign/scale of the invariant form relative to the trace form.
    pub form_scale: f64,
    /// n x (n-1) matrix: column l holds Im diag(cartan_basis[l]).
    pub cartan_diag: DMatrix<f64>,
}

impl AlgebraContext {
    pub fn dim_k(&self) -> usize {
        self.compact_basis.len()
    }

    pub fn dim_real(&self) -> usize {
        self.real_basis.len()
    }

    pub fn rank(&self) -> usize {
        self.n - 1
    }

    /// Coordinates of an element of k in `compact_basis`.
    pub fn compact_coords(&self, x: &CMat) -> Vec<f64> {
        self.compact_basis.iter().map(|t| pair(x, t).re).collect()
    }

    pub fn from_compact_coords(&self, v: &[f64]) -> CMat {
        let mut m = zeros(self.n);
        for (a, t) in v.iter().zip(&self.compact_basis) {
            m += t * c(*a, 0.0);
        }
        m
    }

    /// Real coordinates of X in `real_basis`.
    pub fn coords(&self, x: &CMat) -> Vec<f64> {
        let k = (x - x.adjoint()) * c(0.5, 0.0);
        let kp = (x + x.adjoint()) * c(0.0, -0.5);
        let mut out = self.compact_coords(&k);
        out.extend(self.compact_coords(&kp));
        out
    }

    pub fn from_coords(&self, v: &[f64]) -> CMat {
        let mut m = zeros(self.n);
        for (a, b) in v.iter().zip(&self.real_basis) {
            m += b * c(*a, 0.0);
        }
        m
    }

    /// Cartan coordinates (in `cartan_basis`) of a diagonal element of k.
    pub fn cartan_coords(&self, h: &CMat) -> Vec<f64> {
        self.cartan_basis.iter().map(|t| pair(h, t).re).collect()
    }

    /// Structure constants of g over R: `f[a][b]` = coordinates of [x_a, x_b].
    pub fn structure_constants(&self) -> Vec<Vec<Vec<f64>>> {
        let rb = &self.real_basis;
        rb.iter().map(|xa| rb.iter().map(|xb| self.coords(&comm(xa, xb))).collect()).collect()
    }
}

/// Build the realization of sl(n, C); deterministic basis ordering.
pub fn build_algebra(n: usize) -> Result<AlgebraContext> {
    if n < 2 {
        return Err(ModuliError::InvalidRank(n));
    }
    let s2 = std::f64::consts::SQRT_2;
    let mut kb = Vec::new();
    let mut positive_roots = Vec::new();
    for j in 0..n {
        for k in (j + 1)..n {
            kb.push((elem(n, j, k) - elem(n, k, j)) / c(s2, 0.0));
            kb.push((elem(n, j, k) + elem(n, k, j)) * c(0.0, 1.0 / s2));
            positive_roots.push((j, k));
        }
    }
    let simple_roots = positive_roots.iter().enumerate().filter(|(_, (j, k))| *k == j + 1).map(|(i, _)| i).collect();

    let coroots: Vec<CMat> = (0..n - 1).map(|j| (elem(n, j, j) - elem(n, j + 1, j + 1)) * I).collect();
    // Gram–Schmidt under pair.
    let mut cartan: Vec<CMat> = Vec::new();
    for h in &coroots {
        let mut v = h.clone();
        for e in &cartan {
            v -= e * c(pair(&v, e).re, 0.0);
        }
        let norm = pair(&v, &v).re.sqrt();
        cartan.push(v / c(norm, 0.0));
    }
    // Dual basis h^j: pair(h^i, h_j) = delta_ij.
    let r = n - 1;
    let gram = DMatrix::from_fn(r, r, |i, j| pair(&coroots[i], &coroots[j]).re);
    let ginv = gram.try_inverse().expect("coroot Gram matrix is invertible");
    let dual_cartan = (0..r)
        .map(|i| {
            let mut m = zeros(n);
            for j in 0..r {
                m += &coroots[j] * c(ginv[(j, i)], 0.0);
            }
            m
        })
        .collect();

    kb.extend(cartan.iter().cloned());
    let mut real_basis = kb.clone();
    real_basis.extend(kb.iter().map(|x| x * I));
    let dk = kb.len();
    let cartan_diag = DMatrix::from_fn(n, r, |j, l| cartan[l][(j, j)].im);

    Ok(AlgebraContext {
        n,
        compact_basis: kb,
        real_basis,
        cartan_basis: cartan,
        positive_roots,
        simple_roots,
        coroots,
        dual_cartan,
        casimir: DMatrix::identity(dk, dk),
        form_scale: -1.0,
        cartan_diag,
    })
}

/// The anti-involution singling out the compact form: conjugate transpose.
pub fn bar(x: &CMat) -> CMat {
    x.adjoint()
}

/// Invariant form pair(X, Y) = -Tr(XY).
pub fn pair(x: &CMat, y: &CMat) -> C64 {
    -(x * y).trace()
}

/// Element H = i diag(theta) of the interior of the positive Weyl chamber.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CartanVector {
    pub theta: Vec<f64>,
}

impl CartanVector {
    /// The housed algebra element I(H) = i diag(theta).
    pub fn element(&self) -> CMat {
        let n = self.theta.len();
        let mut m = zeros(n);
        for (j, t) in self.theta.iter().enumerate() {
            m[(j, j)] = c(0.0, *t);
        }
        m
    }

    pub fn n(&self) -> usize {
        self.theta.len()
    }
}

/// Sort a traceless spectrum into the positive Weyl chamber.
pub fn weyl_normalize(theta: &[f64]) -> Result<CartanVector> {
    let tr: f64 = theta.iter().sum();
    let scale = theta.iter().fold(1.0_f64, |m, x| m.max(x.abs()));
    if tr.abs() > INPUT_TOL * scale {
        return Err(ModuliError::InvalidSpectrum(tr));
    }
    let mut v = theta.to_vec();
    v.sort_by(|a, b| b.total_cmp(a));
    if v.windows(2).any(|w| w[0] - w[1] < BOUNDARY_TOL) {
        return Err(ModuliError::BoundaryOrbit);
    }
    Ok(CartanVector { theta: v })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum RSign {
    Plus,
    Minus,
}

/// Classical r-matrix r^t_±(u) as a real coefficient array over `real_basis`:
/// r = sum_ab tensor[a,b] x_a (x) x_b.
#[derive(Debug, Clone)]
pub struct RMatrix {
    pub t: f64,
    pub u: DMatrix<f64>,
    pub sign: RSign,
    pub tensor: DMatrix<f64>,
}

/// Check that u is an antisymmetric (n-1)x(n-1) matrix.
pub fn validate_twist(ctx: &AlgebraContext, u: &DMatrix<f64>) -> Result<()> {
    let r = ctx.rank();
    if u.nrows() != r || u.ncols() != r {
        return Err(ModuliError::DimensionMismatch(format!("twist must be {r}x{r}, got {}x{}", u.nrows(), u.ncols())));
    }
    let res = (u + u.transpose()).amax();
    if res > INPUT_TOL {
        return Err(ModuliError::InvalidTwist(res));
    }
    Ok(())
}

/// Generators spanning the Lie algebra of K*_t(u): E_jk, i E_jk (j < k) and
/// the twisted Cartan directions i c_j - u(c_j).
pub fn dual_generators(ctx: &AlgebraContext, u: &DMatrix<f64>) -> Vec<CMat> {
    let n = ctx.n;
    let mut eps = Vec::new();
    for &(j, k) in &ctx.positive_roots {
        eps.push(elem(n, j, k));
        eps.push(elem(n, j, k) * I);
    }
    for (j, cj) in ctx.cartan_basis.iter().enumerate() {
        let mut uc = zeros(n);
        for (l, cl) in ctx.cartan_basis.iter().enumerate() {
            uc += cl * c(u[(l, j)], 0.0);
        }
        eps.push(cj * I - uc);
    }
    eps
}

/// Construct r^t_±(u). The plus tensor is t * sum_a eps_a (x) kappa^a where
/// kappa^a in k is dual to the K* generators eps_a under Im Tr; the minus
/// tensor is -P(plus).
pub fn r_matrix(ctx: &AlgebraContext, t: f64, u: &DMatrix<f64>, sign: RSign) -> Result<RMatrix> {
    validate_twist(ctx, u)?;
    let eps = dual_generators(ctx, u);
    let kb = &ctx.compact_basis;
    let dk = kb.len();
    let g = DMatrix::from_fn(dk, dk, |a, b| (&eps[a] * &kb[b]).trace().im);
    let m = g.try_inverse().expect("K and K* are in duality");
    let d = ctx.dim_real();
    let mut plus = DMatrix::<f64>::zeros(d, d);
    for (b, e) in eps.iter().enumerate() {
        let mut kappa = zeros(ctx.n);
        for (cc, tc) in kb.iter().enumerate() {
            kappa += tc * c(m[(cc, b)], 0.0);
        }
        let ce = ctx.coords(e);
        let ck = ctx.coords(&kappa);
        for i in 0..d {
            for j in 0..d {
                plus[(i, j)] += ce[i] * ck[j];
            }
        }
    }
    plus *= t;
    let tensor = match sign {
        RSign::Plus => plus,
        RSign::Minus => -plus.transpose(),
    };
    Ok(RMatrix { t, u: u.clone(), sign, tensor })
}

/// Max-norm residual of the classical Yang–Baxter equation
/// [r12, r13] + [r12, r23] + [r13, r23] computed by contracting the real
/// structure constants.
pub fn cybe_residual(ctx: &AlgebraContext, r: &RMatrix) -> f64 {
    let f = ctx.structure_constants();
    let d = ctx.dim_real();
    let rt = &r.tensor;
    let mut out = vec![0.0; d * d * d];
    let idx = |a: usize, b: usize, e: usize| (a * d + b) * d + e;
    for a in 0..d {
        for b in 0..d {
            let rab = rt[(a, b)];
            if rab == 0.0 {
                continue;
            }
            for cc in 0..d {
                for dd in 0..d {
                    let rcd = rt[(cc, dd)];
                    if rcd == 0.0 {
                        continue;
                    }
                    let w = rab * rcd;
                    for e in 0..d {
                        // [x_a, x_c] (x) x_b (x) x_d
                        out[idx(e, b, dd)] += w * f[a][cc][e];
                        // x_a (x) [x_b, x_c] (x) x_d
                        out[idx(a, e, dd)] += w * f[b][cc][e];
                        // x_a (x) x_c (x) [x_b, x_d]
                        out[idx(a, cc, e)] += w * f[b][dd][e];
                    }
                }
            }
        }
    }
    out.iter().fold(0.0, |m, x| m.max(x.abs()))
}

/// The tensor collapsed over C: sum_ab r^ab x_a (x)_C x_b as an n^2 x n^2
/// complex matrix (Kronecker products).
pub fn complex_collapse(ctx: &AlgebraContext, tensor: &DMatrix<f64>) -> CMat {
    let n = ctx.n;
    let mut out = CMat::zeros(n * n, n * n);
    for a in 0..tensor.nrows() {
        for b in 0..tensor.ncols() {
            let w = tensor[(a, b)];
            if w != 0.0 {
                out += ctx.real_basis[a].kronecker(&ctx.real_basis[b]) * c(w, 0.0);
            }
        }
    }
    out
}

/// Residual of the reality condition (bar (x) bar) r_+ = r_-, evaluated in
/// the complex-collapsed tensor where bar (x) bar acts as the adjoint.
pub fn reality_residual(ctx: &AlgebraContext, plus: &RMatrix, minus: &RMatrix) -> f64 {
    let p = complex_collapse(ctx, &plus.tensor);
    let m = complex_collapse(ctx, &minus.tensor);
    (p.adjoint() - m).camax()
}

/// Adjoint action Ad_g X = g X g^-1.
pub fn ad(g: &CMat, x: &CMat) -> CMat {
    g * x * crate::linalg::inv(g)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::{random_antisymmetric, random_su_algebra};
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn basis_sizes() {
        let a2 = build_algebra(2).unwrap();
        assert_eq!((a2.dim_k(), a2.cartan_basis.len(), a2.positive_roots.len()), (3, 1, 1));
        let a3 = build_algebra(3).unwrap();
        assert_eq!((a3.dim_k(), a3.positive_roots.len(), a3.simple_roots.len()), (8, 3, 2));
        assert_eq!(build_algebra(1).unwrap_err(), ModuliError::InvalidRank(1));
    }

    #[test]
    fn compact_basis_is_orthonormal_and_anti_fixed() {
        let a = build_algebra(3).unwrap();
        for (i, x) in a.compact_basis.iter().enumerate() {
            assert!((bar(x) + x).camax() < 1e-15);
            for (j, y) in a.compact_basis.iter().enumerate() {
                let want = if i == j { 1.0 } else { 0.0 };
                assert!((pair(x, y) - c(want, 0.0)).norm() < 1e-14);
            }
        }
    }

    #[test]
    fn dual_cartan_is_dual() {
        let a = build_algebra(4).unwrap();
        for (i, hi) in a.dual_cartan.iter().enumerate() {
            for (j, hj) in a.coroots.iter().enumerate() {
                let want = if i == j { 1.0 } else { 0.0 };
                assert!((pair(hi, hj).re - want).abs() < 1e-13);
            }
        }
    }

    #[test]
    fn coords_roundtrip_on_g() {
        let a = build_algebra(3).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        let x = random_su_algebra(3, &mut rng) + random_su_algebra(3, &mut rng) * I;
        assert!((a.from_coords(&a.coords(&x)) - x).camax() < 1e-14);
    }

    #[test]
    fn weyl_normalize_examples() {
        assert_eq!(weyl_normalize(&[0.3, -0.3]).unwrap().theta, vec![0.3, -0.3]);
        assert_eq!(weyl_normalize(&[-0.3, 0.3]).unwrap().theta, vec![0.3, -0.3]);
        assert_eq!(weyl_normalize(&[0.1, 0.1, -0.2]).unwrap_err(), ModuliError::BoundaryOrbit);
        assert!(matches!(weyl_normalize(&[0.1, 0.2]), Err(ModuliError::InvalidSpectrum(_))));
    }

    #[test]
    fn twist_must_be_antisymmetric() {
        let a = build_algebra(3).unwrap();
        let u = DMatrix::from_row_slice(2, 2, &[0.0, 1.0, 0.5, 0.0]);
        assert!(matches!(r_matrix(&a, 1.0, &u, RSign::Plus), Err(ModuliError::InvalidTwist(_))));
    }

    #[test]
    fn r_matrix_vanishes_at_t_zero() {
        let a = build_algebra(2).unwrap();
        let r = r_matrix(&a, 0.0, &DMatrix::zeros(1, 1), RSign::Plus).unwrap();
        assert_eq!(r.tensor.amax(), 0.0);
    }

    #[test]
    fn cybe_and_reality_small_case() {
        let mut rng = ChaCha8Rng::seed_from_u64(12);
        let a = build_algebra(3).unwrap();
        let u = random_antisymmetric(2, &mut rng);
        let p = r_matrix(&a, 0.7, &u, RSign::Plus).unwrap();
        let m = r_matrix(&a, 0.7, &u, RSign::Minus).unwrap();
        assert!(cybe_residual(&a, &p) < 1e-12);
        assert!(reality_residual(&a, &p, &m) < 1e-12);
        assert!((m.tensor.clone() + p.tensor.transpose()).amax() == 0.0);
    }
}
