//! Numerical core for single-EIT and double-bright-EIT (D-EIT) laser cooling
//! of a trapped ion.
//!
//! The crate is `no_std` (it needs `alloc`). Everything here is a pure
//! computation: building the eight-level ion model, closed-form Lamb-Dicke
//! cooling theory, a matrix-free master-equation propagator, sideband
//! thermometry and the transfer-tensor analysis of time-dependent rates.
//! File formats and the command line live in the `eitcool` crate.
//!
//! Units: every frequency is an angular frequency in rad/s and every time is
//! in seconds unless a function says otherwise.

#![no_std]

extern crate alloc;
#[cfg(test)]
extern crate std;

pub mod error;
pub mod lambdicke;
pub mod lindblad;
pub mod linalg;
pub mod model;
pub mod sequence;
pub mod thermometry;
pub mod ttm;
pub mod tuning;
pub mod units;

pub use error::{Error, Result};
pub use num_complex::Complex64 as C64;
