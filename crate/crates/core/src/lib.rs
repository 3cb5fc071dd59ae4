//! Biorthogonal spectral analysis for non-Hermitian Hamiltonians.
//!
//! The crate builds left/right eigenvector pairs and the Hermitian metric
//! operator G for dense non-normal matrices, evaluates both sides of the
//! modified Hellmann-Feynman identity `dE/dλ = <L|dH/dλ|R>` across parameter
//! sweeps (including PT-broken phases and exceptional-point neighborhoods),
//! and carries exact continuum results for a pair of non-Hermitian
//! oscillators.
//!
//! All numerics are generic over the real scalar type through [`scalar::Scalar`];
//! `f64` aliases are exported at the crate root.

pub mod biortho;
pub mod continuum;
pub mod hft;
pub mod linalg;
pub mod models;
pub mod quadrature;
pub mod scalar;

pub use scalar::{Scalar, C};

/// `f64` working precision aliases.
pub type C64 = num_complex::Complex<f64>;
pub type Matrix64 = linalg::ComplexMatrix<f64>;
pub type Spectrum64 = biortho::BiorthoSpectrum<f64>;
pub type GMetric64 = biortho::GMetric<f64>;
pub type Sweep64 = hft::SweepResult<f64>;

/// `f32` aliases, mostly useful for storage-bound experimentation.
pub type C32 = num_complex::Complex<f32>;
pub type Matrix32 = linalg::ComplexMatrix<f32>;
