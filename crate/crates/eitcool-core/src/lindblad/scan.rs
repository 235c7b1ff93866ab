//! Steady-state scattering rates and detuning scans.

use alloc::format;
use alloc::string::String;
use alloc::vec::Vec;

use super::{correlation_spectrum, steady_state_model, ElectronicSteadyState, QuantumState};
use crate::linalg::CMatrix;
use crate::model::{CoolingScheme, LaserLabel, Level, StructuredModel, N_LEVELS};
use crate::{error::invalid, Result, C64};

#[allow(unused_imports)]
use num_traits::Float;

/// Photon scattering rate Γ × (total P population).
pub fn scattering_rate(state: &QuantumState, gamma_total: f64) -> f64 {
    gamma_total * state.excited_population()
}

/// Same for an 8×8 electronic density matrix.
pub fn scattering_rate_electronic(rho: &CMatrix, gamma_total: f64) -> f64 {
    gamma_total * (rho[(Level::PMinus.index(), Level::PMinus.index())].re + rho[(Level::PPlus.index(), Level::PPlus.index())].re)
}

/// What is swept in a detuning scan.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum ScanMode {
    /// A weak probe with the polarization pattern of `label` and Rabi
    /// frequency `rabi` is added at detuning δ from that beam. The rate is
    /// Γ·P_e of the unperturbed steady state plus the linear-response
    /// absorption 2(Ω_probe/2)² Re S_probe(−δ).
    Probe { label: LaserLabel, rabi: f64 },
    /// The detuning of beam `label` itself is shifted by δ and the full
    /// electronic steady state is solved at every point.
    Laser { label: LaserLabel },
}

impl ScanMode {
    /// Probe on `label` with Rabi frequency 10⁻³Γ of the scheme.
    pub fn weak_probe(label: LaserLabel, scheme: &CoolingScheme) -> Self {
        ScanMode::Probe { label, rabi: 1e-3 * scheme.gamma_total }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ScanPoint {
    pub delta: f64,
    /// Scattering rate in photons/s; `None` when the point failed.
    pub rate: Option<f64>,
    pub flag: Option<String>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ExtremumKind {
    Maximum,
    Minimum,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Extremum {
    pub kind: ExtremumKind,
    pub delta: f64,
    pub rate: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ScanResult {
    pub points: Vec<ScanPoint>,
    pub extrema: Vec<Extremum>,
}

impl ScanResult {
    pub fn maxima(&self) -> impl Iterator<Item = &Extremum> {
        self.extrema.iter().filter(|e| e.kind == ExtremumKind::Maximum)
    }

    pub fn minima(&self) -> impl Iterator<Item = &Extremum> {
        self.extrema.iter().filter(|e| e.kind == ExtremumKind::Minimum)
    }

    pub fn peak(&self) -> f64 {
        self.points.iter().filter_map(|p| p.rate).fold(0.0, f64::max)
    }
}

/// Evaluator of the scattering rate as a function of δ for one scheme.
pub struct RateScanner {
    scheme: CoolingScheme,
    mode: ScanMode,
    probe: Option<(ElectronicSteadyState, CMatrix, f64)>,
}

impl RateScanner {
    pub fn new(scheme: &CoolingScheme, mode: ScanMode) -> Result<Self> {
        scheme.validate()?;
        let probe = match mode {
            ScanMode::Probe { label, rabi } => {
                if !(rabi >= 0.0) {
                    return Err(invalid("probe Rabi frequency must be >= 0"));
                }
                let model = StructuredModel::new(scheme)?;
                let ss = steady_state_model(&model)?;
                let op = probe_operator(scheme, label)?;
                let base = scattering_rate_electronic(&ss.rho, scheme.gamma_total);
                Some((ss, op, base))
            }
            ScanMode::Laser { label } => {
                if scheme.laser(label).is_none() {
                    return Err(invalid(format!("scheme has no {label} beam to scan")));
                }
                None
            }
        };
        Ok(RateScanner { scheme: scheme.clone(), mode, probe })
    }

    pub fn rate(&self, delta: f64) -> Result<f64> {
        match (self.mode, &self.probe) {
            (ScanMode::Probe { rabi, .. }, Some((ss, op, base))) => {
                let s = correlation_spectrum(ss, op, -delta)?;
                let eps = 0.5 * rabi;
                Ok(base + 2.0 * eps * eps * s.re)
            }
            (ScanMode::Laser { label }, _) => {
                let mut s = self.scheme.clone();
                if let Some(l) = s.laser_mut(label) {
                    l.detuning += delta;
                }
                let ss = steady_state_model(&StructuredModel::new(&s)?)?;
                Ok(scattering_rate_electronic(&ss.rho, s.gamma_total))
            }
            _ => Err(invalid("scanner not initialised")),
        }
    }
}

/// Σ w (|g⟩⟨e| + |e⟩⟨g|) over the transitions the beam `label` drives, w the
/// dipole weights.
pub fn probe_operator(scheme: &CoolingScheme, label: LaserLabel) -> Result<CMatrix> {
    let mut s = scheme.clone();
    let l = s.laser_mut(label).ok_or_else(|| invalid(format!("scheme has no {label} beam")))?;
    l.rabi_frequency = 2.0;
    let mut op = CMatrix::zeros(N_LEVELS, N_LEVELS);
    for c in crate::model::couplings(&s).iter().filter(|c| c.laser == label) {
        let (g, e) = (c.ground.index(), c.excited.index());
        op[(g, e)] += C64::new(c.amplitude, 0.0);
        op[(e, g)] += C64::new(c.amplitude, 0.0);
    }
    Ok(op)
}

const GOLDEN: f64 = 0.618_033_988_749_895;

/// Golden-section search for an extremum of `f` inside [a, b].
pub fn golden_extremum<F: FnMut(f64) -> Result<f64>>(mut f: F, mut a: f64, mut b: f64, kind: ExtremumKind) -> Result<(f64, f64)> {
    let sign = if kind == ExtremumKind::Maximum { -1.0 } else { 1.0 };
    let mut c = b - GOLDEN * (b - a);
    let mut d = a + GOLDEN * (b - a);
    let mut fc = sign * f(c)?;
    let mut fd = sign * f(d)?;
    for _ in 0..200 {
        if (b - a).abs() <= 1e-10 * (a.abs() + b.abs()).max(1e-300) {
            break;
        }
        if fc < fd {
            b = d;
            d = c;
            fd = fc;
            c = b - GOLDEN * (b - a);
            fc = sign * f(c)?;
        } else {
            a = c;
            c = d;
            fc = fd;
            d = a + GOLDEN * (b - a);
            fd = sign * f(d)?;
        }
    }
    let x = 0.5 * (a + b);
    Ok((x, f(x)?))
}

/// Scans `deltas`; failed points are flagged and skipped. Local extrema of
/// the sampled curve are refined by golden-section search between their
/// neighbours.
pub fn spectrum_scan(scheme: &CoolingScheme, deltas: &[f64], mode: ScanMode) -> Result<ScanResult> {
    if deltas.is_empty() {
        return Err(invalid("empty detuning grid"));
    }
    if deltas.windows(2).any(|w| !(w[1] > w[0])) {
        return Err(invalid("detuning grid must be strictly increasing"));
    }
    let scanner = RateScanner::new(scheme, mode)?;
    let points: Vec<ScanPoint> = deltas
        .iter()
        .map(|&d| match scanner.rate(d) {
            Ok(r) => ScanPoint { delta: d, rate: Some(r), flag: None },
            Err(e) => ScanPoint { delta: d, rate: None, flag: Some(format!("{e}")) },
        })
        .collect();
    let extrema = find_extrema(&points, |d| scanner.rate(d));
    Ok(ScanResult { points, extrema })
}

/// Interior extrema among consecutive valid points, refined with `f`.
pub fn find_extrema<F: FnMut(f64) -> Result<f64>>(points: &[ScanPoint], mut f: F) -> Vec<Extremum> {
    let mut out = Vec::new();
    for w in points.windows(3) {
        let (Some(r0), Some(r1), Some(r2)) = (w[0].rate, w[1].rate, w[2].rate) else { continue };
        let kind = if r1 > r0 && r1 >= r2 {
            ExtremumKind::Maximum
        } else if r1 < r0 && r1 <= r2 {
            ExtremumKind::Minimum
        } else {
            continue;
        };
        let (delta, rate) = golden_extremum(&mut f, w[0].delta, w[2].delta, kind).unwrap_or((w[1].delta, r1));
        let better = match kind {
            ExtremumKind::Maximum => rate >= r1,
            ExtremumKind::Minimum => rate <= r1,
        };
        let (delta, rate) = if better { (delta, rate) } else { (w[1].delta, r1) };
        out.push(Extremum { kind, delta, rate });
    }
    out
}
