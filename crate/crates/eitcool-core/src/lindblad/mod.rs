//! Master-equation engine for the electronic ⊗ vibrational density operator.
//!
//! dρ/dt = −i[H,ρ] + Σ_j Γ_j (L_j ρ L_j† − ½{L_j†L_j, ρ}), with Γ_j summing to
//! Γ for each P level.

mod electronic;
mod generator;
mod integrator;
mod propagate;
mod scan;
mod state;

pub use electronic::*;
pub use generator::*;
pub use integrator::*;
pub use propagate::*;
pub use scan::*;
pub use state::*;
