//! Pseudo-spectral simulation and Fourier analysis of the damped isothermal
//! Euler equations in the log-density form
//!
//! ```text
//! ∂t a + u·∇a + div u = 0,
//! ∂t u + u·∇u + ∇a + u = 0,     a = ln ρ − ln ρ*,
//! ```
//!
//! on a periodic box standing in for whole space.

pub mod diagnostics;
pub mod dynamics;
pub mod error;
pub mod greens;
mod par;
pub mod spectral;
pub mod stats;

pub use error::{Error, Result};
