//! Temporal imaging of squeezed light through a sum-frequency-generation
//! (SFG) time lens.
//!
//! The crate is organised bottom-up:
//!
//! - [`field`]: time/frequency grids, Gaussian pulses, spectral transforms
//!   and dispersive propagation of complex envelopes.
//! - [`lens`]: the SFG beam-splitter transformation, the ideal quadratic
//!   phase lens, an RK4 integrator of the coupled-mode equations, and pump
//!   preparation.
//! - [`squeezing`]: OPA squeezing model, homodyne squeezing spectra before
//!   and after the imaging system.
//! - [`imaging`]: single-lens imaging configuration, pixel trains, the full
//!   propagation chain and pixel diagnostics.
//! - [`design`]: phase-matching, bandwidth and field-of-view budgets,
//!   including Sellmeier-based crystal dispersion.
//! - [`kv`]: the sectioned key-value text format used by scenario and
//!   dispersion files.

#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod design;
pub mod error;
pub mod field;
pub mod imaging;
pub mod kv;
pub mod lens;
pub mod squeezing;

pub use error::{Error, Result};
pub use num_complex::Complex64;
