//! Spectral analysis of periodic Schrödinger operators `-∂² + q` on zigzag
//! nanotube graphs with an odd number `N` of zigzag chains.
//!
//! The graph operator decomposes into `N` sectors. Each sector is governed by
//! the scalar Hill transfer matrix of `q` on `[0, 1]`, so every spectral
//! quantity reduces to level sets of a single entire function `Δ₀(λ)`.

pub mod asymptotics;
pub mod cli;
pub mod eigenfunctions;
pub mod error;
pub mod hill;
pub mod potential;
pub mod lyapunov;
pub mod oracle;
pub mod spectra;
pub mod tolerances;
mod scalar;

pub use error::{Error, Result};
pub use num_complex::Complex64;
pub use potential::Potential;
