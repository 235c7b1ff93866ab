//! Physical constants and unit conversions.

use core::f64::consts::PI;

/// Natural linewidth of the 40Ca+ S1/2-P1/2 transition, 2π × 20.7 MHz.
pub const GAMMA_CA40: f64 = 2.0 * PI * 20.7e6;

/// Fraction of the total P-state decay rate Γ that sets the coherence decay
/// rate γ used in the Lamb-Dicke spectra (γ = Γ/2, the half width of the
/// excited-state Lorentzian). Changing the convention is a one-line edit.
pub const COHERENCE_FRACTION: f64 = 0.5;

/// Bohr magneton divided by ħ, in rad/s per tesla.
pub const BOHR_MAGNETON_OVER_HBAR: f64 = 2.0 * PI * 13.996_245_04e9;

/// Reduced Planck constant in J·s.
pub const HBAR: f64 = 1.054_571_817e-34;

/// Boltzmann constant in J/K.
pub const K_B: f64 = 1.380_649e-23;

/// Default branching of the P1/2 decay into S1/2 and D3/2 (configurable).
pub const BRANCH_S_DEFAULT: f64 = 0.935;
pub const BRANCH_D_DEFAULT: f64 = 0.065;

/// Coherence decay rate γ for a total decay rate Γ.
pub fn coherence_rate(gamma_total: f64) -> f64 {
    COHERENCE_FRACTION * gamma_total
}

/// Converts a frequency in MHz to rad/s.
pub fn mhz(f: f64) -> f64 {
    2.0 * PI * f * 1e6
}

/// Converts a frequency in kHz to rad/s.
pub fn khz(f: f64) -> f64 {
    2.0 * PI * f * 1e3
}

/// Converts rad/s to MHz.
pub fn to_mhz(w: f64) -> f64 {
    w / (2.0 * PI * 1e6)
}
