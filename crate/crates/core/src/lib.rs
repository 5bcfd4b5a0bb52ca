//! Linear relaxations of multilinear sets over 0/1 variables.
//!
//! The crate builds and compares three families of relaxations of
//! `{(x, z) : x ∈ {0,1}^V, z_I = ∏_{v∈I} x_v for I ∈ E}`:
//!
//! * the standard relaxation ([`relax::standard_relaxation`]),
//! * the extended flower relaxation ([`relax::flower_relaxation`]) together
//!   with exact separation of its rows,
//! * relaxations of recursive linearizations ([`linearization`]), including
//!   the construction of a recursive McCormick linearization that certifies a
//!   given flower inequality.
//!
//! All arithmetic is exact ([`rational::Rational`]); polyhedra are compared by
//! LP-based implication and projected with Fourier–Motzkin elimination
//! ([`poly`]). The [`verify`] module bundles the resulting machine checks and
//! bound loops.

pub mod linearization;
pub mod model;
pub mod poly;
pub mod rational;
pub mod relax;
pub mod verify;

pub use model::{Hypergraph, MultilinearInstance, VarKey, VarSet};
pub use rational::Rational;
