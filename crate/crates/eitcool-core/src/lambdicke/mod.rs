//! Closed-form Lamb-Dicke cooling theory: absorption spectra, heating and
//! cooling rates, the birth-death rate equation and leading-order optimal
//! rates.
//!
//! S(ω) = ∫₀^∞ e^{iωt}⟨σ_η(0)σ_η(t)⟩dt with σ_η the first-order motional
//! coupling. In this convention the bright resonance of a blue-detuned
//! scheme sits at negative ω and Re S ≥ 0.

mod optimal;
mod rates;
mod spectra;

pub use optimal::*;
pub use rates::*;
pub use spectra::*;
