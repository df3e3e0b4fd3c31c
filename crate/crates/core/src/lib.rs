//! Decay of an unstable level coupled to a continuum: self-energy,
//! resonance pole, survival amplitude by three independent methods, the
//! short/long-time asymptotics and the weak-coupling (lambda^2 t) limit.

pub mod amplitude;
pub mod asymptotics;
mod conv;
pub mod error;
pub mod fit;
pub mod params;
pub mod pole;
pub mod quad;
pub mod selfenergy;
pub mod spectral;
pub mod vanhove;

pub use error::{DecayError, Result};
pub use num_complex::Complex64;
