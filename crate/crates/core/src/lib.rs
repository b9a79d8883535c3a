//! Pseudospectral laboratory for fractional nonlinear Schrödinger and
//! fractional Hartree equations on a periodic torus.

pub mod analysis;
pub mod cli;
pub mod error;
pub mod fft;
pub mod grid;
pub mod highlow;
pub mod modulation;
pub mod nonlinearity;
pub mod propagator;
pub mod sampling;
pub mod solver;

pub use error::{LabError, Result};
pub use grid::{Field, Grid, RadialProfile, Spectrum};
