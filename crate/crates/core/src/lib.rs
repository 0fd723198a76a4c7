//! Numerical laboratory for the lowest Landau level of 2D Pauli-type
//! operators with admissible nonconstant magnetic fields.
//!
//! * [`field`]: fields `b0 + b̃` with a finite Fourier charge and their potentials.
//! * [`zeromodes`]: orthonormal zero-mode bases and the projection-kernel diagonal.
//! * [`toeplitz`]: Berezin–Toeplitz matrices, counting functions and comparators.
//! * [`ssf`]: effective spectral shift corridors near zero energy and Levinson ratios.

// NaN must fail parameter checks, so they are written as `!(x > 0.0)`.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod error;
pub mod field;
pub mod linalg;
pub mod quadrature;
pub mod ssf;
pub mod toeplitz;
pub mod zeromodes;

pub use error::{Error, Result};
pub use field::{FourierMode, MagneticField};
pub use ssf::{EffectiveSpectrum, PerturbationProfile, SsfCorridor};
pub use toeplitz::{SymbolU, ToeplitzMatrix};
pub use zeromodes::{QuadratureRule, ZeroModeBasis};
