//! Numerical toolkit for the Poisson geometry of SU(n) multiplicity spaces.
//!
//! The crate realizes sl(n, C) over R with its compact form su(n), builds the
//! classical r-matrices of the compact Poisson-Lie group and its dual, and
//! provides the group-level machinery (Iwasawa factorization, dressing,
//! Lu-Weinstein moment maps), coadjoint and dressing orbits with moment-map
//! solvers, holonomies of rational flat connections on the three-holed sphere,
//! and the graph/Goldman side (Fock-Rosly bracket, the maps xi and chi).

pub mod decompositions;
pub mod error;
pub mod graph_poisson;
pub mod holonomy;
pub mod lie_core;
pub mod linalg;
pub mod orbits_moment;
pub mod verify;

pub use error::{ModuliError, Result};
