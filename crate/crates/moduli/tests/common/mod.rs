//! Shared helpers for integration tests: seeded RNG, test-function corpora
//! and a generic nested finite-difference Jacobi check.

#![allow(dead_code)]

use moduli::linalg::CMat;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

pub type EntryFn = Box<dyn Fn(&CMat) -> f64 + Send + Sync>;

/// Real or imaginary part of a matrix entry, as a boxed test function.
pub fn entry(i: usize, j: usize, imag: bool) -> EntryFn {
    Box::new(move |m: &CMat| if imag { m[(i, j)].im } else { m[(i, j)].re })
}

/// A small corpus of matrix-entry functions on n x n matrices.
pub fn entry_corpus(n: usize) -> Vec<EntryFn> {
    let mut out = Vec::new();
    for i in 0..n {
        for j in 0..n {
            out.push(entry(i, j, false));
            out.push(entry(i, j, true));
        }
    }
    out
}

pub type Fun<'a, P> = &'a dyn Fn(&P) -> f64;
pub type Bracket<'a, P> = &'a dyn Fn(Fun<P>, Fun<P>, &P) -> f64;

/// Jacobi residual {f,{g,h}} + {g,{h,f}} + {h,{f,g}} at x. `outer` is used for
/// the outside bracket (coarser step), `inner` for the nested one.
pub fn jacobi<P>(outer: Bracket<P>, inner: Bracket<P>, f: Fun<P>, g: Fun<P>, h: Fun<P>, x: &P) -> f64 {
    let gh = |p: &P| inner(g, h, p);
    let hf = |p: &P| inner(h, f, p);
    let fg = |p: &P| inner(f, g, p);
    outer(f, &gh, x) + outer(g, &hf, x) + outer(h, &fg, x)
}

/// Random residue triple X1 + X2 + X3 = 0 in su(n) with its spectra.
pub fn random_triple(n: usize, r: &mut ChaCha8Rng, size: f64) -> ([CMat; 3], [moduli::lie_core::CartanVector; 3]) {
    use moduli::linalg::{c, random_su_algebra};
    use moduli::orbits_moment::orbit_spectrum;
    let x1 = random_su_algebra(n, r) * c(size, 0.0);
    let x2 = random_su_algebra(n, r) * c(size, 0.0);
    let x3 = -(&x1 + &x2);
    let h = |x: &CMat| moduli::lie_core::weyl_normalize(&orbit_spectrum(x)).expect("generic spectrum");
    let hs = [h(&x1), h(&x2), h(&x3)];
    ([x1, x2, x3], hs)
}
