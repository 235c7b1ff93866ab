use crate::model::{omega_minus_sq, raman_detunings, CoolingScheme, LaserLabel};
use crate::{error::invalid, Result};

#[allow(unused_imports)]
use num_traits::Float;

/// Leading-order predictions for a tuned scheme.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum OptimalRates {
    SingleEit {
        rate: f64,
        n_ss: f64,
        n_pi: f64,
    },
    DoubleEit {
        radial_rate: f64,
        axial_rate: f64,
        n_ss: f64,
    },
}

/// R = (η²/2γ)(Ω_πΩ_σ/Ω)².
pub fn single_eit_rate(eta: f64, omega_pi: f64, omega_sigma: f64, gamma: f64) -> f64 {
    let o2 = omega_pi * omega_pi + omega_sigma * omega_sigma;
    if o2 == 0.0 {
        return 0.0;
    }
    eta * eta / (2.0 * gamma) * (omega_pi * omega_sigma).powi(2) / o2
}

/// Off-resonant contribution n_π ≈ (2γ²/(4Δ²+γ²))(Ω_π/Ω)².
pub fn n_pi(delta: f64, gamma: f64, omega_pi: f64, omega_sigma: f64) -> f64 {
    let o2 = omega_pi * omega_pi + omega_sigma * omega_sigma;
    if o2 == 0.0 {
        return 0.0;
    }
    2.0 * gamma * gamma / (4.0 * delta * delta + gamma * gamma) * omega_pi * omega_pi / o2
}

/// γ²/(4Δ²+γ²), the resonant-scattering floor of the final occupation.
pub fn n_ss_floor(delta: f64, gamma: f64) -> f64 {
    gamma * gamma / (4.0 * delta * delta + gamma * gamma)
}

/// D-EIT radial rate (η_σ²/2γ)Ω_π²Ω_D²Ω_σ²/Ω₋⁴.
pub fn deit_radial_rate(eta_sigma: f64, omega_pi: f64, omega_sigma: f64, omega_d: f64, gamma: f64) -> f64 {
    let om4 = omega_minus_sq(omega_pi, omega_sigma, omega_d).powi(2);
    if om4 == 0.0 {
        return 0.0;
    }
    eta_sigma * eta_sigma / (2.0 * gamma) * (omega_pi * omega_d * omega_sigma).powi(2) / om4
}

/// Ceiling on the D-EIT axial rate (η_π²/2γ)(Ω_π²Ω_D²/Ω₋⁴)·max(Ω_π²α², Ω_σ²);
/// the rate at a given tuning is usually well below it.
pub fn deit_axial_rate(eta_pi: f64, alpha: f64, omega_pi: f64, omega_sigma: f64, omega_d: f64, gamma: f64) -> f64 {
    let om4 = omega_minus_sq(omega_pi, omega_sigma, omega_d).powi(2);
    if om4 == 0.0 {
        return 0.0;
    }
    let m = (omega_pi * alpha).powi(2).max(omega_sigma * omega_sigma);
    eta_pi * eta_pi / (2.0 * gamma) * (omega_pi * omega_d).powi(2) / om4 * m
}

/// Leading-order rates for the scheme. Schemes whose 866 beam is in
/// two-photon resonance (D-EIT) use the D-EIT forms with
/// radial projections of σ and axial projections of π and 866; otherwise the
/// single-EIT forms on the scheme's own mode.
pub fn optimal_rates(scheme: &CoolingScheme) -> Result<OptimalRates> {
    let gamma = scheme.gamma();
    let (op, os, od) = (scheme.omega_pi(), scheme.omega_sigma(), scheme.omega_d());
    if op == 0.0 && os == 0.0 {
        return Err(invalid("no 397 beams configured"));
    }
    let (_, _, raman_d) = raman_detunings(scheme.delta, scheme.delta_s());
    let is_deit = od > 0.0
        && scheme
            .laser(LaserLabel::D866)
            .is_some_and(|l| (l.detuning - raman_d).abs() <= 1e-9 * scheme.delta.abs().max(1.0));
    if !is_deit {
        let eta = scheme.eta_pi() - scheme.eta_sigma();
        return Ok(OptimalRates::SingleEit {
            rate: single_eit_rate(eta, op, os, gamma),
            n_ss: n_ss_floor(scheme.delta, gamma) + n_pi(scheme.delta, gamma, op, os),
            n_pi: n_pi(scheme.delta, gamma, op, os),
        });
    }
    let eta_s = scheme.laser(LaserLabel::Sigma397).map_or(0.0, |l| l.lamb_dicke_radial);
    let eta_p = scheme.laser(LaserLabel::Pi397).map_or(0.0, |l| l.lamb_dicke_axial);
    let eta_d = scheme.laser(LaserLabel::D866).map_or(0.0, |l| l.lamb_dicke_axial);
    let alpha = if eta_p > 0.0 { (eta_d - eta_p) / eta_p } else { 0.0 };
    Ok(OptimalRates::DoubleEit {
        radial_rate: deit_radial_rate(eta_s, op, os, od, gamma),
        axial_rate: deit_axial_rate(eta_p, alpha, op, os, od, gamma),
        n_ss: n_ss_floor(scheme.delta, gamma),
    })
}

/// Ω = √(4Δν) puts the bright-state Stark shift Ω²/4Δ at ν.
pub fn bright_state_tuning(delta: f64, nu_target: f64) -> Result<f64> {
    if !(delta > 0.0 && nu_target > 0.0) {
        return Err(invalid("bright-state tuning needs delta > 0 and nu > 0"));
    }
    Ok((4.0 * delta * nu_target).sqrt())
}

/// Ω²/4Δ.
pub fn stark_shift(delta: f64, omega: f64) -> f64 {
    omega * omega / (4.0 * delta)
}

/// Width of the bright resonance γ_bright = νγ/(4√(Δ²+Ω²)).
pub fn bright_width(delta: f64, omega: f64, nu: f64, gamma: f64) -> f64 {
    nu * gamma / (4.0 * delta.hypot(omega))
}

/// Exact dressed bright-state position ω₋ = Δ/2 − √(Δ²+Ω²)/2 (negative).
pub fn bright_position(delta: f64, omega: f64) -> f64 {
    0.5 * delta - 0.5 * delta.hypot(omega)
}
