//! Physical configuration and operator construction.
//!
//! The electronic basis is fixed as S-, S+, P-, P+, D-3, D-, D+, D+3 and the
//! full space is electronic ⊗ Fock(0..N) with the Fock index running fastest.

mod fock;
mod operators;
mod scheme;

pub use fock::*;
pub use operators::*;
pub use scheme::*;
