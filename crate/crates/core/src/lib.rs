//! Analytic discretized influence functionals.
//!
//! This crate computes the η coefficients that enter discretized
//! Feynman-Vernon influence functionals (Trotter and Strang splittings) from a
//! bath response function written as a sum of complex exponentials,
//! `α(t) = Σ_j p_j exp(Ω_j t)`. It also carries everything needed to produce
//! and check such baths:
//!
//! * [`model`]: spectral densities, the thermal context, exponential baths.
//! * [`decompose`]: Padé / Matsubara / closed-form residue decompositions.
//! * [`bath`]: α(t) by exponential sum and by quadrature, and the inverse
//!   map from an exponential bath back to J(ω).
//! * [`expfit`]: least-squares fitting of sampled α(t) to exponential sums.
//! * [`eta`]: the coefficients themselves, analytic and by quadrature.
//! * [`quadrature`]: the adaptive integration engine behind every oracle.
//!
//! The crate is `no_std` and only needs `alloc`. Units are ħ = 1 with time in
//! ps and frequency in ps⁻¹ throughout.

#![no_std]
#![forbid(unsafe_code)]
// Float-trait imports back the libm math in no_std builds. When anything else
// in the build links std, its inherent float methods shadow them.
#![allow(unused_imports)]

extern crate alloc;
#[cfg(test)]
extern crate std;

pub mod bath;
pub mod decompose;
pub mod error;
pub mod eta;
pub mod expfit;
pub mod model;
pub mod quadrature;
pub mod special;
pub mod tridiag;

pub use error::{Error, Result};
pub use num_complex::Complex64;

pub use model::{DiscretePath, ExponentialBath, PhysicalContext, SpectralDensity};
