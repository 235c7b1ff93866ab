use alloc::format;

use crate::lindblad::{correlation_spectrum, steady_state_model};
use crate::linalg::{solve, CMatrix, CVector};
use crate::model::{
    dark_state_deit, dark_state_single, effective_blocks, omega_minus_sq, CouplingModel, CoolingScheme,
    StructuredModel, EXCITED_LEVELS,
};
use crate::{error::invalid, Error, Result, C64};

#[allow(unused_imports)]
use num_traits::Float;

/// Evaluations closer than this many γ to a real pole are rejected.
pub const POLE_GUARD: f64 = 1e-6;

/// S(ω) together with its D-EIT building blocks.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SpectralResponse {
    pub omega: f64,
    pub s_value: C64,
    pub a_value: C64,
    pub b_value: C64,
    pub det_value: C64,
}

/// Closed-form parameters of a Raman-resonant D-EIT configuration on one mode.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DeitParams {
    pub delta: f64,
    pub delta_s: f64,
    pub gamma: f64,
    pub omega_pi: f64,
    pub omega_sigma: f64,
    pub omega_d: f64,
    pub eta_pi: f64,
    pub eta_sigma: f64,
    pub eta_d: f64,
}

impl DeitParams {
    pub fn from_scheme(scheme: &CoolingScheme) -> Self {
        DeitParams {
            delta: scheme.delta,
            delta_s: scheme.delta_s(),
            gamma: scheme.gamma(),
            omega_pi: scheme.omega_pi(),
            omega_sigma: scheme.omega_sigma(),
            omega_d: scheme.omega_d(),
            eta_pi: scheme.eta_pi(),
            eta_sigma: scheme.eta_sigma(),
            eta_d: scheme.eta_d(),
        }
    }

    /// Components (E₋, E₊) of the coupling state |E⟩ on (P-, P+).
    pub fn coupling_state(&self) -> Result<(f64, f64)> {
        let om2 = omega_minus_sq(self.omega_pi, self.omega_sigma, self.omega_d);
        if !(om2 > 0.0) {
            return Err(invalid("coupling state undefined: all Rabi frequencies vanish"));
        }
        let c = self.omega_pi * self.omega_d / (2.0 * om2);
        Ok((
            c * self.omega_pi * (self.eta_d - self.eta_pi),
            c * self.omega_sigma * (self.eta_pi - self.eta_sigma),
        ))
    }
}

fn guard(omega: f64, pole: f64, gamma: f64) -> Result<()> {
    if (omega - pole).abs() <= POLE_GUARD * gamma.abs().max(f64::MIN_POSITIVE) {
        return Err(Error::Pole { omega, pole });
    }
    Ok(())
}

/// Real part of the single-EIT (Lambda) spectrum
/// (η²/4)(Ω_πΩ_σ/Ω)² γ / [(ω − Δ − Ω²/4ω)² + γ²], η = η_π − η_σ.
/// Δ is the detuning of |P+⟩ from the dark state. The ω → 0 limit is 0.
pub fn single_eit_spectrum(
    omega: f64,
    delta: f64,
    omega_pi: f64,
    omega_sigma: f64,
    gamma: f64,
    eta_pi: f64,
    eta_sigma: f64,
) -> f64 {
    let o2 = omega_pi * omega_pi + omega_sigma * omega_sigma;
    if omega == 0.0 || o2 == 0.0 {
        return 0.0;
    }
    let eta = eta_pi - eta_sigma;
    let amp = omega_pi * omega_sigma;
    let x = omega - delta - o2 / (4.0 * omega);
    0.25 * eta * eta * amp * amp / o2 * gamma / (x * x + gamma * gamma)
}

/// Single-EIT spectrum of a Lambda-model scheme: the |P+⟩ offset is Δ − Δ_s/3.
pub fn single_eit_spectrum_scheme(omega: f64, scheme: &CoolingScheme) -> f64 {
    single_eit_spectrum(
        omega,
        scheme.delta - scheme.delta_s() / 3.0,
        scheme.omega_pi(),
        scheme.omega_sigma(),
        scheme.gamma(),
        scheme.eta_pi(),
        scheme.eta_sigma(),
    )
}

/// The P- and P+ denominators a(ω), b(ω) of the D-EIT resolvent.
pub fn deit_ab(
    omega: f64,
    delta: f64,
    delta_s: f64,
    gamma: f64,
    omega_pi: f64,
    omega_sigma: f64,
    omega_d: f64,
) -> Result<(C64, C64)> {
    guard(omega, 0.0, gamma)?;
    if omega_d != 0.0 {
        for pole in [-0.8 * delta_s, -0.6 * delta_s, -1.4 * delta_s] {
            guard(omega, pole, gamma)?;
        }
    }
    let (p2, s2, d2) = (omega_pi * omega_pi, omega_sigma * omega_sigma, omega_d * omega_d);
    let a = C64::new(
        omega - delta - delta_s / 3.0 - (p2 + d2) / (4.0 * omega) - 3.0 * d2 / (4.0 * omega + 3.2 * delta_s),
        gamma,
    );
    let b = C64::new(
        omega - delta + delta_s / 3.0
            - (p2 + s2) / (4.0 * omega)
            - 0.25 * d2 * (3.0 / (omega + 0.6 * delta_s) + 1.0 / (omega + 1.4 * delta_s)),
        gamma,
    );
    Ok((a, b))
}

/// Off-diagonal resolvent element Ω_πΩ_σ/4ω linking P- and P+.
pub fn deit_cross(omega: f64, omega_pi: f64, omega_sigma: f64) -> f64 {
    omega_pi * omega_sigma / (4.0 * omega)
}

/// i[E₋² b + E₊² a + 2k E₋E₊]/𝒟 with 𝒟 = ab − k².
pub fn resolvent_combination(a: C64, b: C64, k: f64, e_minus: f64, e_plus: f64) -> C64 {
    let det = a * b - k * k;
    C64::i() * (b * (e_minus * e_minus) + a * (e_plus * e_plus) + 2.0 * k * e_minus * e_plus) / det
}

/// General D-EIT spectrum with its building blocks.
pub fn deit_response(omega: f64, p: &DeitParams) -> Result<SpectralResponse> {
    let (a, b) = deit_ab(omega, p.delta, p.delta_s, p.gamma, p.omega_pi, p.omega_sigma, p.omega_d)?;
    let k = deit_cross(omega, p.omega_pi, p.omega_sigma);
    let (em, ep) = p.coupling_state()?;
    Ok(SpectralResponse {
        omega,
        s_value: resolvent_combination(a, b, k, em, ep),
        a_value: a,
        b_value: b,
        det_value: a * b - k * k,
    })
}

pub fn deit_spectrum(omega: f64, scheme: &CoolingScheme) -> Result<C64> {
    Ok(deit_response(omega, &DeitParams::from_scheme(scheme))?.s_value)
}

/// Radial specialisation (η_π = η_D = 0): only the P+ channel survives,
/// Re S = −(η_σ²/4)(Ω_π²Ω_D²Ω_σ²/Ω₋⁴)·Im[1/(b − k²/a)].
pub fn deit_spectrum_radial(omega: f64, p: &DeitParams) -> Result<f64> {
    let (a, b) = deit_ab(omega, p.delta, p.delta_s, p.gamma, p.omega_pi, p.omega_sigma, p.omega_d)?;
    let k = deit_cross(omega, p.omega_pi, p.omega_sigma);
    let om4 = omega_minus_sq(p.omega_pi, p.omega_sigma, p.omega_d).powi(2);
    if !(om4 > 0.0) {
        return Err(invalid("radial spectrum undefined: all Rabi frequencies vanish"));
    }
    let pre = 0.25 * p.eta_sigma * p.eta_sigma * (p.omega_pi * p.omega_d * p.omega_sigma).powi(2) / om4;
    Ok(-pre * (C64::new(1.0, 0.0) / (b - k * k / a)).im)
}

/// Axial specialisation (η_σ = 0) written with α = (η_D − η_π)/η_π:
/// Re S = −(η_π²Ω_π²Ω_D²/4Ω₋⁴)·Im[(Ω_π²α² b + Ω_σ² a + 2kΩ_πΩ_σ α)/𝒟].
pub fn deit_spectrum_axial(omega: f64, p: &DeitParams) -> Result<f64> {
    if p.eta_pi == 0.0 {
        return Err(invalid("axial form needs eta_pi > 0 to define alpha"));
    }
    let alpha = (p.eta_d - p.eta_pi) / p.eta_pi;
    let (a, b) = deit_ab(omega, p.delta, p.delta_s, p.gamma, p.omega_pi, p.omega_sigma, p.omega_d)?;
    let k = deit_cross(omega, p.omega_pi, p.omega_sigma);
    let om4 = omega_minus_sq(p.omega_pi, p.omega_sigma, p.omega_d).powi(2);
    let pre = 0.25 * (p.eta_pi * p.omega_pi * p.omega_d).powi(2) / om4;
    let num = b * (p.omega_pi * alpha).powi(2)
        + a * p.omega_sigma * p.omega_sigma
        + 2.0 * k * p.omega_pi * p.omega_sigma * alpha;
    Ok(-pre * (num / (a * b - k * k)).im)
}

/// α = (η_D − η_π)/η_π from the axial projections of a scheme's lasers.
pub fn axial_alpha(scheme: &CoolingScheme) -> Option<f64> {
    let pi = scheme.laser(crate::model::LaserLabel::Pi397)?.lamb_dicke_axial;
    let d = scheme.laser(crate::model::LaserLabel::D866)?.lamb_dicke_axial;
    (pi > 0.0).then(|| (d - pi) / pi)
}

/// Appendix-style matrix form built from the Hamiltonian blocks:
/// M(ω) = ω + H_EE + iγ − H_EG (ω + H_GG)⁻¹ H_GE and S = i E^T M⁻¹ E, with
/// |E⟩ = iσ_η|dark⟩ taken from the operator model.
pub fn resolvent_spectrum(omega: f64, scheme: &CoolingScheme) -> Result<C64> {
    let blocks = effective_blocks(scheme)?;
    let gamma = scheme.gamma();
    let ng = blocks.h_gg.nrows();
    let mut g = blocks.h_gg.clone();
    for i in 0..ng {
        g[(i, i)] += omega;
    }
    let mut inv_ge = CMatrix::zeros(ng, 2);
    for col in 0..2 {
        let rhs: CVector = blocks.h_ge.column(col).into_owned();
        let x = solve(g.clone(), &rhs, 1e12, &format!("ground resolvent at omega = {omega:e}"))
            .map_err(|_| Error::Pole { omega, pole: omega })?;
        inv_ge.set_column(col, &x);
    }
    let mut m = blocks.h_ee.clone() - blocks.h_ge.adjoint() * inv_ge;
    for i in 0..2 {
        m[(i, i)] += C64::new(omega, gamma);
    }
    let e = coupling_state_from_operators(scheme)?;
    let x = solve(m, &e, 1e14, "excited resolvent")?;
    Ok(C64::i() * e.iter().zip(x.iter()).map(|(a, b)| a * b).sum::<C64>())
}

/// iσ_η|dark⟩ restricted to (P-, P+), with the dark state of the scheme's
/// coupling model.
pub fn coupling_state_from_operators(scheme: &CoolingScheme) -> Result<CVector> {
    let model = StructuredModel::new(scheme)?;
    let dark = match scheme.coupling {
        CouplingModel::Lambda => dark_state_single(scheme.omega_pi(), scheme.omega_sigma())?,
        CouplingModel::Full => dark_state_deit(scheme.omega_pi(), scheme.omega_sigma(), scheme.omega_d())?,
    };
    let full = model.cooling_operator() * dark * C64::i();
    Ok(CVector::from_fn(2, |i, _| full[EXCITED_LEVELS[i].index()]))
}

/// Regression-theorem spectrum of the cooling operator from the electronic
/// Liouvillian. Works for any scheme with a unique stationary state.
pub fn numeric_spectrum(scheme: &CoolingScheme, omega: f64) -> Result<C64> {
    let model = StructuredModel::new(scheme)?;
    let ss = steady_state_model(&model)?;
    correlation_spectrum(&ss, &model.cooling_operator(), omega)
}

/// Numeric spectrum on a grid, sharing one steady-state solve.
pub fn numeric_spectrum_grid(scheme: &CoolingScheme, omegas: &[f64]) -> Result<alloc::vec::Vec<C64>> {
    let model = StructuredModel::new(scheme)?;
    let ss = steady_state_model(&model)?;
    let op = model.cooling_operator();
    omegas.iter().map(|&w| correlation_spectrum(&ss, &op, w)).collect()
}
