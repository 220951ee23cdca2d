//! Coherent-state quantization of a particle on the circle and in the
//! infinite square well.
//!
//! The crate builds truncated matrices of quantized observables, their
//! spectra, and their lower symbols (coherent-state expectation values)
//! together with the dispersions derived from them. Closed-form operators
//! are paired with quadrature oracles that integrate the defining
//! phase-space formula directly.

pub mod circle;
pub mod error;
pub mod kernels;
pub mod params;
pub mod quadrature;
pub mod spectra;
pub mod symbols;
pub mod well;

pub use error::{CsqError, Result};
pub use params::{Parameters, PhasePoint};

pub type C64 = nalgebra::Complex<f64>;
pub type CMatrix = nalgebra::DMatrix<C64>;

/// Default tolerance for truncated lattice sums.
pub const DEFAULT_TOL: f64 = 1e-16;

/// Largest entry modulus of a complex matrix.
pub fn max_abs(m: &CMatrix) -> f64 {
    m.iter().fold(0.0f64, |acc, v| acc.max(v.norm()))
}
