//! Small dense complex-matrix helpers shared by every module.

use nalgebra::DMatrix;
use num_complex::Complex64;
use rand::Rng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Deserializer, Serialize, Serializer};

pub type C64 = Complex64;
pub type CMat = DMatrix<Complex64>;

pub const I: C64 = C64::new(0.0, 1.0);

pub fn c(re: f64, im: f64) -> C64 {
    C64::new(re, im)
}

pub fn eye(n: usize) -> CMat {
    CMat::identity(n, n)
}

pub fn zeros(n: usize) -> CMat {
    CMat::zeros(n, n)
}

/// Elementary matrix E_jk.
pub fn elem(n: usize, j: usize, k: usize) -> CMat {
    let mut m = zeros(n);
    m[(j, k)] = c(1.0, 0.0);
    m
}

pub fn dagger(m: &CMat) -> CMat {
    m.adjoint()
}

pub fn trace(m: &CMat) -> C64 {
    m.trace()
}

pub fn fro(m: &CMat) -> f64 {
    m.norm()
}

pub fn comm(a: &CMat, b: &CMat) -> CMat {
    a * b - b * a
}

pub fn expm(m: &CMat) -> CMat {
    m.exp()
}

/// Inverse via LU; panics only on exactly singular input, which cannot occur
/// for the group elements handled here.
pub fn inv(m: &CMat) -> CMat {
    m.clone().try_inverse().expect("matrix is singular")
}

pub fn det(m: &CMat) -> C64 {
    m.determinant()
}

pub fn diag(v: &[C64]) -> CMat {
    let n = v.len();
    let mut m = zeros(n);
    for (j, x) in v.iter().enumerate() {
        m[(j, j)] = *x;
    }
    m
}

pub fn real_diag(v: &[f64]) -> CMat {
    diag(&v.iter().map(|&x| c(x, 0.0)).collect::<Vec<_>>())
}

/// Eigenvalues of a general complex matrix via the complex Schur form.
pub fn eigenvalues(m: &CMat) -> Vec<C64> {
    let schur = nalgebra::Schur::new(m.clone());
    let (_, t) = schur.unpack();
    (0..t.nrows()).map(|j| t[(j, j)]).collect()
}

/// Eigen-decomposition of a Hermitian matrix: ascending eigenvalues and the
/// matching unitary eigenvector matrix.
pub fn hermitian_eigen(m: &CMat) -> (Vec<f64>, CMat) {
    let h = (m + m.adjoint()) * c(0.5, 0.0);
    let eig = nalgebra::SymmetricEigen::new(h);
    let mut idx: Vec<usize> = (0..eig.eigenvalues.len()).collect();
    idx.sort_by(|&a, &b| eig.eigenvalues[a].total_cmp(&eig.eigenvalues[b]));
    let vals = idx.iter().map(|&j| eig.eigenvalues[j]).collect();
    let mut vecs = zeros(m.nrows());
    for (dst, &src) in idx.iter().enumerate() {
        vecs.set_column(dst, &eig.eigenvectors.column(src));
    }
    (vals, vecs)
}

/// Matrix logarithm of a Hermitian positive-definite matrix.
pub fn log_hpd(m: &CMat) -> CMat {
    let (vals, v) = hermitian_eigen(m);
    let d = real_diag(&vals.iter().map(|x| x.ln()).collect::<Vec<_>>());
    &v * d * v.adjoint()
}

/// Sorted (descending) real parts of the eigenvalues of a Hermitian matrix.
pub fn hermitian_spectrum_desc(m: &CMat) -> Vec<f64> {
    let (mut vals, _) = hermitian_eigen(m);
    vals.reverse();
    vals
}

pub fn random_gaussian_matrix(n: usize, rng: &mut ChaCha8Rng) -> CMat {
    CMat::from_fn(n, n, |_, _| c(gauss(rng), gauss(rng)))
}

/// Standard normal deviate (Box–Muller).
pub fn gauss(rng: &mut ChaCha8Rng) -> f64 {
    let u1: f64 = rng.random::<f64>().max(1e-300);
    let u2: f64 = rng.random::<f64>();
    (-2.0 * u1.ln()).sqrt() * (2.0 * std::f64::consts::PI * u2).cos()
}

/// Haar-distributed element of SU(n): QR of a Ginibre matrix with the
/// phases of R's diagonal folded back into Q, then the determinant removed.
pub fn random_su(n: usize, rng: &mut ChaCha8Rng) -> CMat {
    let g = random_gaussian_matrix(n, rng);
    let qr = g.qr();
    let (mut q, r) = (qr.q(), qr.r());
    for j in 0..n {
        let d = r[(j, j)];
        let ph = d / d.norm();
        for i in 0..n {
            q[(i, j)] *= ph;
        }
    }
    let d = det(&q);
    let root = d.powf(1.0 / n as f64);
    q / root
}

/// Random element of SL(n, C) with Gaussian entries, rescaled to det 1.
pub fn random_sl(n: usize, rng: &mut ChaCha8Rng) -> CMat {
    let g = random_gaussian_matrix(n, rng);
    let d = det(&g);
    &g / d.powf(1.0 / n as f64)
}

/// Random traceless anti-Hermitian matrix (element of su(n)).
pub fn random_su_algebra(n: usize, rng: &mut ChaCha8Rng) -> CMat {
    let m = random_gaussian_matrix(n, rng);
    let x = (&m - m.adjoint()) * c(0.5, 0.0);
    let tr = x.trace() / c(n as f64, 0.0);
    x - eye(n) * tr
}

/// Random real antisymmetric m×m matrix.
pub fn random_antisymmetric(m: usize, rng: &mut ChaCha8Rng) -> nalgebra::DMatrix<f64> {
    let a = nalgebra::DMatrix::from_fn(m, m, |_, _| gauss(rng));
    (&a - a.transpose()) * 0.5
}

/// JSON form of a complex matrix: row-major rows of `[re, im]` pairs.
pub fn to_json_rows(m: &CMat) -> Vec<Vec<[f64; 2]>> {
    (0..m.nrows()).map(|i| (0..m.ncols()).map(|j| [m[(i, j)].re, m[(i, j)].im]).collect()).collect()
}

pub fn from_json_rows(rows: &[Vec<[f64; 2]>]) -> Option<CMat> {
    let n = rows.len();
    let m = rows.first().map_or(0, |r| r.len());
    if rows.iter().any(|r| r.len() != m) {
        return None;
    }
    Some(CMat::from_fn(n, m, |i, j| c(rows[i][j][0], rows[i][j][1])))
}

/// Serde adapter so structs can hold `CMat` fields in the row-pair format.
pub mod cmat_serde {
    use super::*;

    pub fn serialize<S: Serializer>(m: &CMat, s: S) -> Result<S::Ok, S::Error> {
        to_json_rows(m).serialize(s)
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> Result<CMat, D::Error> {
        let rows = Vec::<Vec<[f64; 2]>>::deserialize(d)?;
        from_json_rows(&rows).ok_or_else(|| serde::de::Error::custom("ragged matrix rows"))
    }
}
