//! Layer-potential evaluation on curved triangulated surfaces by recursive
//! reduction quadrature.
//!
//! Surface integrals of the Laplace single/double layer kernels (and their
//! normal derivatives) over a curvilinear triangle are reduced, after fitting
//! the density with quaternion combinations of solid-harmonic gradients, to
//! line integrals over the patch boundary. The nearly singular line integrals
//! are handled by singularity-swap quadrature, so potentials can be evaluated
//! accurately on the surface and arbitrarily close to it.
//!
//! The crate is `no_std` (with `alloc`); all file and thread handling lives in
//! the companion `rrq` crate.
#![no_std]

extern crate alloc;

pub mod bie;
pub mod density;
pub mod evaluator;
pub mod gauss;
pub mod geometry;
pub mod harmonics;
pub mod linalg;
pub mod nodes;
pub mod oneform;
pub mod quaternion;
pub mod ssq;

pub use num_complex::Complex64;
