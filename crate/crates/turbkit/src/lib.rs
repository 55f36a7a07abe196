//! Pseudo-spectral solver for the stochastically forced incompressible
//! Navier-Stokes equations on the periodic box, plus the scale-by-scale
//! energy-budget diagnostics used to check the third-order structure
//! function laws on stationary runs.

pub mod burgers;
pub mod checkpoint;
pub mod cli;
pub mod cutoff;
pub mod diag;
pub mod error;
pub mod fft;
pub mod field;
pub mod forcing;
pub mod grid;
pub mod integrator;
pub mod lgrid;
pub mod ops;
pub mod shear;
pub mod sphere;
pub mod stats;

pub use cutoff::{make_cutoff, CutoffField, CutoffKind};
pub use error::{Result, TurbError};
pub use field::{ScalarField, SpectralField};
pub use grid::WaveGrid;
