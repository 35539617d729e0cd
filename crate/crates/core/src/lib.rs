//! Damped harmonic oscillator in extended phase space.

pub mod error;
pub mod expsum;
pub mod grid;
pub mod params;
pub mod transforms;
pub mod classical;
pub mod format;
pub mod spectral;
pub mod propagator;
pub mod verify;
pub mod cli;
