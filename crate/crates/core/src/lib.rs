//! Particle creation and two-point correlations of a quantum field in a
//! waveguide whose propagation speed changes in time.
//!
//! Modules, bottom-up:
//! - [`special`]: complex log-Gamma and the closed-form cosine/sine series.
//! - [`waveguide`]: profiles, mode frequencies and shapes, Bogoliubov
//!   coefficients and particle spectra.
//! - [`sudden`]: closed-form correlator after an instantaneous step, its
//!   mode-sum counterpart and the singularity-line catalog.
//! - [`smooth`]: exact and large-`n` correlators after a tanh step.
//! - [`grid`]: equal-time correlator grids over the `(x1, x2)` square.
//! - [`lattice`]: brute-force mode integration and LC-ladder time stepping.

// NaN must fail the `!(x > 0)` style guards
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod error;
pub mod grid;
pub mod lattice;
pub mod smooth;
pub mod special;
pub mod sudden;
pub mod waveguide;

pub use error::{Error, Result};
