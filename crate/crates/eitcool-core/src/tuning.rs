//! Bright-state tuning: choose pump Rabi frequencies so that the bright
//! resonances sit on the motional frequencies.
//!
//! For D-EIT the bright states are the real zeros of the dispersive
//! determinant 𝒟₀(ω) = Re[a(ω)b(ω) − (Ω_πΩ_σ/4ω)²] at γ = 0, located at
//! ω = −ν. At fixed ω, 𝒟₀ is linear in Ω_σ² and quadratic in Ω_D², so each
//! half-step of the alternation below is solved in closed form.

use alloc::format;
use alloc::string::String;
use alloc::vec::Vec;

use crate::lambdicke::{bright_state_tuning, bright_width, deit_ab};
use crate::linalg::brent_root;
use crate::lindblad::{spectrum_scan, ScanMode};
use crate::model::{CoolingScheme, LaserLabel};
use crate::{error::invalid, Error, Result};

#[allow(unused_imports)]
use num_traits::Float;

const MAX_ALTERNATIONS: usize = 500;
const CONVERGED: f64 = 1e-13;
const REDUCED_GRID: usize = 240;

/// 𝒟₀(ω) for the scheme's Δ, Δ_s, Ω_π and the given pumps.
pub fn dispersion(omega: f64, scheme: &CoolingScheme, omega_sigma: f64, omega_d: f64) -> Result<f64> {
    let op = scheme.omega_pi();
    let (a, b) = deit_ab(omega, scheme.delta, scheme.delta_s(), 0.0, op, omega_sigma, omega_d)?;
    let k = op * omega_sigma / (4.0 * omega);
    Ok((a * b).re - k * k)
}

fn scan_report(f: &dyn Fn(f64) -> Result<f64>, scale: f64) -> String {
    let mut s = String::new();
    for x in [0.1, 0.3, 1.0, 3.0, 10.0, 30.0] {
        let v = f(x * scale).map_or_else(|e| format!("{e}"), |v| format!("{v:.3e}"));
        s.push_str(&format!(" [{:.3e}: {v}]", x * scale));
    }
    s
}

/// Ω_σ that puts a zero of 𝒟₀ at ω, for fixed Ω_D.
pub fn solve_omega_sigma(omega: f64, scheme: &CoolingScheme, omega_d: f64) -> Result<f64> {
    let scale = (scheme.delta.abs() * omega.abs()).max(1e-300);
    let f0 = dispersion(omega, scheme, 0.0, omega_d)?;
    let f1 = (dispersion(omega, scheme, scale.sqrt(), omega_d)? - f0) / scale;
    let s = -f0 / f1;
    if !(s > 0.0) || !s.is_finite() {
        let f = |w: f64| dispersion(omega, scheme, w, omega_d);
        return Err(Error::Fit(format!(
            "no sigma Rabi frequency places a bright state at {omega:.4e} rad/s; D0 over Omega_sigma:{}",
            scan_report(&f, scale.sqrt())
        )));
    }
    Ok(s.sqrt())
}

/// Smallest Ω_D that puts a zero of 𝒟₀ at ω, for fixed Ω_σ.
pub fn solve_omega_d(omega: f64, scheme: &CoolingScheme, omega_sigma: f64) -> Result<f64> {
    let u = (scheme.delta.abs() * omega.abs()).max(1e-300);
    let f = |x: f64| dispersion(omega, scheme, omega_sigma, x);
    let y0 = f(0.0)?;
    let y1 = f(u.sqrt())?;
    let y2 = f((2.0 * u).sqrt())?;
    // y(v) = c0 + c1 v + c2 v² in v = Ω_D²/u.
    let c0 = y0;
    let c2 = 0.5 * (y2 - 2.0 * y1 + y0);
    let c1 = y1 - y0 - c2;
    let mut roots: Vec<f64> = Vec::new();
    if c2.abs() <= 1e-14 * (c1.abs() + c0.abs()) {
        roots.push(-c0 / c1);
    } else {
        let disc = c1 * c1 - 4.0 * c2 * c0;
        if disc >= 0.0 {
            let q = -0.5 * (c1 + c1.signum() * disc.sqrt());
            roots.push(q / c2);
            roots.push(c0 / q);
        }
    }
    let v = roots.into_iter().filter(|v| *v > 0.0 && v.is_finite()).fold(f64::INFINITY, f64::min);
    if !v.is_finite() {
        return Err(Error::Fit(format!(
            "no 866 Rabi frequency places a bright state at {omega:.4e} rad/s; D0 over Omega_D:{}",
            scan_report(&f, u.sqrt())
        )));
    }
    Ok((v * u).sqrt())
}

/// D-EIT tuning: returns `base` at detuning Δ with the beams in Raman
/// resonance, Ω_π unchanged, and Ω_σ, Ω_D chosen so that the radial and
/// axial bright states sit at ν_r and ν_a. Starts from Ω_σ = √(4Δν_r),
/// Ω_D = √(Δν_a) and alternates the two closed-form solves; if that fails,
/// solves the reduced one-dimensional condition instead.
pub fn tune_scheme(base: &CoolingScheme, nu_r: f64, nu_a: f64, delta: f64) -> Result<CoolingScheme> {
    if !(delta > 0.0) {
        return Err(invalid("tuning needs delta > 0"));
    }
    if !(nu_r > 0.0 && nu_a > 0.0) {
        return Err(invalid("mode targets must be > 0"));
    }
    for label in [LaserLabel::Pi397, LaserLabel::Sigma397, LaserLabel::D866] {
        if base.laser(label).is_none() {
            return Err(invalid(format!("D-EIT tuning needs a {label} beam")));
        }
    }
    if !(base.omega_pi() > 0.0) {
        return Err(invalid("probe Rabi frequency must be > 0"));
    }
    let mut s = base.clone();
    s.delta = delta;
    s.set_raman_resonance();
    let (os, od) = match alternate(&s, nu_r, nu_a, delta) {
        Ok(v) => v,
        Err(first) => reduced_root(&s, nu_r, nu_a, delta).ok_or(first)?,
    };
    set_rabi(&mut s, LaserLabel::Sigma397, os);
    set_rabi(&mut s, LaserLabel::D866, od);
    Ok(s)
}

fn alternate(s: &CoolingScheme, nu_r: f64, nu_a: f64, delta: f64) -> Result<(f64, f64)> {
    let mut os = bright_state_tuning(delta, nu_r)?;
    let mut od = (delta * nu_a).sqrt();
    for _ in 0..MAX_ALTERNATIONS {
        let od_new = solve_omega_d(-nu_a, s, os)?;
        let os_new = solve_omega_sigma(-nu_r, s, od_new)?;
        let change = ((od_new - od) / od_new).abs().max(((os_new - os) / os_new).abs());
        od = od_new;
        os = os_new;
        if change <= CONVERGED {
            return Ok((os, od));
        }
    }
    Err(Error::Fit(format!("bright-state alternation did not converge (Omega_sigma = {os:.4e}, Omega_D = {od:.4e})")))
}

/// Fallback when the alternation stalls: with Ω_σ(Ω_D) taken from the
/// radial condition, the axial condition is a function of Ω_D alone. Its
/// first sign change on a log grid is refined by Brent's method; jumps
/// across poles are rejected by the residual check.
fn reduced_root(s: &CoolingScheme, nu_r: f64, nu_a: f64, delta: f64) -> Option<(f64, f64)> {
    let g = |od: f64| -> Option<(f64, f64)> {
        let os = solve_omega_sigma(-nu_r, s, od).ok()?;
        Some((os, dispersion(-nu_a, s, os, od).ok()?))
    };
    let scale = (delta * nu_a).sqrt();
    let grid: Vec<f64> = (0..=REDUCED_GRID).map(|i| scale * 10f64.powf(-3.0 + 6.0 * i as f64 / REDUCED_GRID as f64)).collect();
    let mut prev: Option<(f64, f64)> = None;
    for &od in &grid {
        let Some((_, y)) = g(od) else {
            prev = None;
            continue;
        };
        if let Some((a, ya)) = prev {
            if ya * y < 0.0 {
                let root = brent_root(|x| g(x).map_or(f64::NAN, |v| v.1), a, od, 1e-14 * od);
                if let Some((os, r)) = root.and_then(|x| g(x).map(|(os, r)| ((os, x), r))) {
                    if r.abs() <= 1e-6 * ya.abs().min(y.abs()) {
                        return Some(os);
                    }
                }
            }
        }
        prev = Some((od, y));
    }
    None
}

/// Single-EIT tuning: total Ω = √(4Δν), split as Ω_σ = √(Ω² − Ω_π²).
pub fn tune_single_eit(base: &CoolingScheme, nu: f64, delta: f64) -> Result<CoolingScheme> {
    let total = bright_state_tuning(delta, nu)?;
    let op = base.omega_pi();
    if op >= total {
        return Err(invalid(format!("probe Rabi frequency {op:.4e} exceeds the tuned total {total:.4e}")));
    }
    if base.laser(LaserLabel::Sigma397).is_none() {
        return Err(invalid("single-EIT tuning needs a sigma397 beam"));
    }
    let mut s = base.clone();
    let ds = s.delta_s();
    s.delta = delta;
    if let Some(l) = s.laser_mut(LaserLabel::Pi397) {
        l.detuning = delta;
    }
    if let Some(l) = s.laser_mut(LaserLabel::Sigma397) {
        l.detuning = delta - ds;
    }
    set_rabi(&mut s, LaserLabel::Sigma397, (total * total - op * op).sqrt());
    Ok(s)
}

fn set_rabi(s: &mut CoolingScheme, label: LaserLabel, value: f64) {
    if let Some(l) = s.laser_mut(label) {
        l.rabi_frequency = value;
    }
}

/// Result of locating one bright state in a probe scan.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BrightCheck {
    pub target: f64,
    /// Nearest scan maximum in probe detuning, if any.
    pub found: Option<f64>,
    /// γ_bright for the pump that sets this resonance.
    pub width: f64,
}

impl BrightCheck {
    pub fn relative_error(&self) -> Option<f64> {
        self.found.map(|f| (f - self.target).abs() / self.target)
    }

    pub fn within_width(&self) -> bool {
        self.found.is_some_and(|f| (f - self.target).abs() <= self.width)
    }
}

/// Weak-probe scan of the tuned scheme on (0, 1.5·max target] and the
/// maximum nearest to each target.
pub fn verify_bright_states(scheme: &CoolingScheme, targets: &[(f64, f64)], points: usize) -> Result<Vec<BrightCheck>> {
    let top = targets.iter().map(|t| t.0).fold(0.0, f64::max);
    if !(top > 0.0) || points < 10 {
        return Err(invalid("need positive targets and at least 10 scan points"));
    }
    let grid: Vec<f64> = (1..=points).map(|i| 1.5 * top * i as f64 / points as f64).collect();
    let scan = spectrum_scan(scheme, &grid, ScanMode::weak_probe(LaserLabel::Sigma397, scheme))?;
    let gamma = scheme.gamma();
    Ok(targets
        .iter()
        .map(|&(target, pump)| {
            let found = scan.maxima().map(|m| m.delta).min_by(|a, b| {
                (a - target).abs().partial_cmp(&(b - target).abs()).unwrap_or(core::cmp::Ordering::Equal)
            });
            BrightCheck { target, found, width: bright_width(scheme.delta, pump, target, gamma) }
        })
        .collect())
}
