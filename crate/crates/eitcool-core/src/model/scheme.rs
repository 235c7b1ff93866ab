use alloc::vec::Vec;
use core::fmt;

use crate::units::{self, BOHR_MAGNETON_OVER_HBAR};
use crate::{error::invalid, Result};

/// Electronic levels in basis order. The full Hilbert space is
/// `Level ⊗ Fock(0..N)` with the Fock index running fastest.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Level {
    SMinus,
    SPlus,
    PMinus,
    PPlus,
    DMinus3,
    DMinus,
    DPlus,
    DPlus3,
}

pub const N_LEVELS: usize = 8;

impl Level {
    pub const ALL: [Level; N_LEVELS] = [
        Level::SMinus,
        Level::SPlus,
        Level::PMinus,
        Level::PPlus,
        Level::DMinus3,
        Level::DMinus,
        Level::DPlus,
        Level::DPlus3,
    ];

    pub const fn index(self) -> usize {
        self as usize
    }

    pub fn is_excited(self) -> bool {
        matches!(self, Level::PMinus | Level::PPlus)
    }

    /// Twice the magnetic quantum number.
    pub fn two_m(self) -> i32 {
        match self {
            Level::SMinus | Level::PMinus | Level::DMinus => -1,
            Level::SPlus | Level::PPlus | Level::DPlus => 1,
            Level::DMinus3 => -3,
            Level::DPlus3 => 3,
        }
    }

    pub fn is_s(self) -> bool {
        matches!(self, Level::SMinus | Level::SPlus)
    }

    pub fn name(self) -> &'static str {
        match self {
            Level::SMinus => "S-",
            Level::SPlus => "S+",
            Level::PMinus => "P-",
            Level::PPlus => "P+",
            Level::DMinus3 => "D-3",
            Level::DMinus => "D-",
            Level::DPlus => "D+",
            Level::DPlus3 => "D+3",
        }
    }
}

/// Documented basis ordering, written into checkpoint headers.
pub const BASIS_ORDER: &str = "S-,S+,P-,P+,D-3,D-,D+,D+3 (x) Fock 0..N-1";

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum LaserLabel {
    Pi397,
    Sigma397,
    D866,
}

impl LaserLabel {
    pub fn name(self) -> &'static str {
        match self {
            LaserLabel::Pi397 => "pi397",
            LaserLabel::Sigma397 => "sigma397",
            LaserLabel::D866 => "d866",
        }
    }

    pub fn parse(s: &str) -> Result<Self> {
        match s {
            "pi397" => Ok(LaserLabel::Pi397),
            "sigma397" => Ok(LaserLabel::Sigma397),
            "d866" => Ok(LaserLabel::D866),
            other => Err(invalid(alloc::format!("unknown laser label `{other}`"))),
        }
    }
}

impl fmt::Display for LaserLabel {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Polarization {
    Pi,
    SigmaPlus,
    SigmaMinus,
    SigmaPlusMinus,
}

impl Polarization {
    /// Does this polarization drive a transition changing 2m by `two_dm`
    /// (excited minus ground)?
    pub fn drives(self, two_dm: i32) -> bool {
        match self {
            Polarization::Pi => two_dm == 0,
            Polarization::SigmaPlus => two_dm == 2,
            Polarization::SigmaMinus => two_dm == -2,
            Polarization::SigmaPlusMinus => two_dm.abs() == 2,
        }
    }

    pub fn name(self) -> &'static str {
        match self {
            Polarization::Pi => "pi",
            Polarization::SigmaPlus => "sigma+",
            Polarization::SigmaMinus => "sigma-",
            Polarization::SigmaPlusMinus => "sigma+-",
        }
    }

    pub fn parse(s: &str) -> Result<Self> {
        match s {
            "pi" => Ok(Polarization::Pi),
            "sigma+" => Ok(Polarization::SigmaPlus),
            "sigma-" => Ok(Polarization::SigmaMinus),
            "sigma+-" | "sigma±" => Ok(Polarization::SigmaPlusMinus),
            other => Err(invalid(alloc::format!("unknown polarization `{other}`"))),
        }
    }
}

/// One cooling beam.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LaserDrive {
    pub label: LaserLabel,
    /// Ω in rad/s.
    pub rabi_frequency: f64,
    /// Detuning from the field-free transition, rad/s, blue positive.
    pub detuning: f64,
    pub lamb_dicke_axial: f64,
    pub lamb_dicke_radial: f64,
    pub polarization: Polarization,
}

impl LaserDrive {
    pub fn new(label: LaserLabel, rabi_frequency: f64, detuning: f64) -> Self {
        let polarization = match label {
            LaserLabel::Pi397 => Polarization::Pi,
            LaserLabel::Sigma397 => Polarization::SigmaPlus,
            LaserLabel::D866 => Polarization::SigmaPlusMinus,
        };
        LaserDrive {
            label,
            rabi_frequency,
            detuning,
            lamb_dicke_axial: 0.0,
            lamb_dicke_radial: 0.0,
            polarization,
        }
    }

    pub fn with_lamb_dicke(mut self, axial: f64, radial: f64) -> Self {
        self.lamb_dicke_axial = axial;
        self.lamb_dicke_radial = radial;
        self
    }

    /// Lamb-Dicke projection on the given mode class.
    pub fn lamb_dicke(&self, mode: ModeLabel) -> f64 {
        match mode {
            ModeLabel::Axial => self.lamb_dicke_axial,
            ModeLabel::Radial1 | ModeLabel::Radial2 => self.lamb_dicke_radial,
        }
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.rabi_frequency >= 0.0) || !self.rabi_frequency.is_finite() {
            return Err(invalid(alloc::format!("{}: rabi frequency must be finite and >= 0", self.label)));
        }
        if !self.detuning.is_finite() {
            return Err(invalid(alloc::format!("{}: detuning must be finite", self.label)));
        }
        if !(self.lamb_dicke_axial.is_finite() && self.lamb_dicke_radial.is_finite()) {
            return Err(invalid(alloc::format!("{}: Lamb-Dicke parameters must be finite", self.label)));
        }
        Ok(())
    }
}

/// Static magnetic field.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ZeemanField {
    /// B in tesla.
    pub field_strength: f64,
    /// μ_B/ħ in rad/s per tesla.
    pub bohr_magneton_over_hbar: f64,
}

impl ZeemanField {
    pub fn new(field_strength: f64) -> Self {
        ZeemanField { field_strength, bohr_magneton_over_hbar: BOHR_MAGNETON_OVER_HBAR }
    }

    /// Field giving a prescribed ground-state splitting Δ_s.
    pub fn from_splitting(delta_s: f64) -> Self {
        ZeemanField::new(delta_s / (2.0 * BOHR_MAGNETON_OVER_HBAR))
    }

    /// μ_B·B in rad/s.
    pub fn zeeman_unit(&self) -> f64 {
        self.bohr_magneton_over_hbar * self.field_strength
    }

    /// Ground-state splitting Δ_s = 2 μ_B B.
    pub fn delta_s(&self) -> f64 {
        2.0 * self.zeeman_unit()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum ModeLabel {
    Axial,
    Radial1,
    Radial2,
}

impl ModeLabel {
    pub fn name(self) -> &'static str {
        match self {
            ModeLabel::Axial => "axial",
            ModeLabel::Radial1 => "radial1",
            ModeLabel::Radial2 => "radial2",
        }
    }

    pub fn parse(s: &str) -> Result<Self> {
        match s {
            "axial" => Ok(ModeLabel::Axial),
            "radial1" | "radial" => Ok(ModeLabel::Radial1),
            "radial2" => Ok(ModeLabel::Radial2),
            other => Err(invalid(alloc::format!("unknown mode `{other}`"))),
        }
    }
}

/// One vibrational mode of the trapped ion.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TrapMode {
    pub label: ModeLabel,
    /// ν in rad/s.
    pub frequency: f64,
    /// Background heating in phonons/s.
    pub background_heating: f64,
}

impl TrapMode {
    pub fn new(label: ModeLabel, frequency: f64) -> Self {
        TrapMode { label, frequency, background_heating: 0.0 }
    }
}

/// Which optical couplings of the eight-level model are kept.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum CouplingModel {
    /// Every transition driven by the configured polarizations.
    Full,
    /// The single-EIT Lambda system: the 397 beams couple only S± to P+,
    /// and the 866 beam is ignored.
    Lambda,
}

/// Complete physical configuration of one cooling pulse acting on one mode.
#[derive(Debug, Clone, PartialEq)]
pub struct CoolingScheme {
    pub lasers: Vec<LaserDrive>,
    pub zeeman: ZeemanField,
    pub mode: TrapMode,
    /// Γ, total decay rate of each P1/2 sublevel, rad/s.
    pub gamma_total: f64,
    pub branch_s: f64,
    pub branch_d: f64,
    /// Δ, blue detuning of the virtual level, rad/s.
    pub delta: f64,
    pub coupling: CouplingModel,
}

/// Laser detunings (π, σ, 866) that put S-, S+ and D+ in two-photon
/// resonance for a common detuning Δ and ground splitting Δ_s.
pub fn raman_detunings(delta: f64, delta_s: f64) -> (f64, f64, f64) {
    (delta, delta - delta_s, delta + 0.7 * delta_s)
}

impl CoolingScheme {
    /// Bare scheme with no lasers.
    pub fn bare(mode: TrapMode, delta: f64, zeeman: ZeemanField) -> Self {
        CoolingScheme {
            lasers: Vec::new(),
            zeeman,
            mode,
            gamma_total: units::GAMMA_CA40,
            branch_s: units::BRANCH_S_DEFAULT,
            branch_d: units::BRANCH_D_DEFAULT,
            delta,
            coupling: CouplingModel::Full,
        }
    }

    /// Single-EIT scheme: π probe and σ+ pump in two-photon resonance, plus an
    /// 866 repumper on its field-free resonance.
    pub fn single_eit(
        mode: TrapMode,
        delta: f64,
        zeeman: ZeemanField,
        omega_pi: f64,
        omega_sigma: f64,
        omega_repump: f64,
    ) -> Self {
        let (dp, ds, _) = raman_detunings(delta, zeeman.delta_s());
        let mut s = CoolingScheme::bare(mode, delta, zeeman);
        s.lasers.push(LaserDrive::new(LaserLabel::Pi397, omega_pi, dp));
        s.lasers.push(LaserDrive::new(LaserLabel::Sigma397, omega_sigma, ds));
        if omega_repump > 0.0 {
            s.lasers.push(LaserDrive::new(LaserLabel::D866, omega_repump, 0.0));
        }
        s
    }

    /// D-EIT scheme: π, σ+ and 866 beams with S-, S+ and D+ in two-photon
    /// resonance.
    pub fn double_eit(
        mode: TrapMode,
        delta: f64,
        zeeman: ZeemanField,
        omega_pi: f64,
        omega_sigma: f64,
        omega_d: f64,
    ) -> Self {
        let (dp, ds, dd) = raman_detunings(delta, zeeman.delta_s());
        let mut s = CoolingScheme::bare(mode, delta, zeeman);
        s.lasers.push(LaserDrive::new(LaserLabel::Pi397, omega_pi, dp));
        s.lasers.push(LaserDrive::new(LaserLabel::Sigma397, omega_sigma, ds));
        s.lasers.push(LaserDrive::new(LaserLabel::D866, omega_d, dd));
        s
    }

    /// Applies the default beam geometry: σ has no axial projection, π and
    /// 866 have no radial projection.
    pub fn with_geometry(mut self, eta_pi_axial: f64, eta_sigma_radial: f64, eta_d_axial: f64) -> Self {
        for l in &mut self.lasers {
            match l.label {
                LaserLabel::Pi397 => {
                    l.lamb_dicke_axial = eta_pi_axial;
                    l.lamb_dicke_radial = 0.0;
                }
                LaserLabel::Sigma397 => {
                    l.lamb_dicke_axial = 0.0;
                    l.lamb_dicke_radial = eta_sigma_radial;
                }
                LaserLabel::D866 => {
                    l.lamb_dicke_axial = eta_d_axial;
                    l.lamb_dicke_radial = 0.0;
                }
            }
        }
        self
    }

    /// Sets the Lamb-Dicke projections on the scheme's own mode directly.
    pub fn with_mode_lamb_dicke(mut self, eta_pi: f64, eta_sigma: f64, eta_d: f64) -> Self {
        let mode = self.mode.label;
        for l in &mut self.lasers {
            let eta = match l.label {
                LaserLabel::Pi397 => eta_pi,
                LaserLabel::Sigma397 => eta_sigma,
                LaserLabel::D866 => eta_d,
            };
            match mode {
                ModeLabel::Axial => l.lamb_dicke_axial = eta,
                _ => l.lamb_dicke_radial = eta,
            }
        }
        self
    }

    pub fn with_coupling(mut self, coupling: CouplingModel) -> Self {
        self.coupling = coupling;
        self
    }

    pub fn with_branching(mut self, branch_s: f64) -> Self {
        self.branch_s = branch_s;
        self.branch_d = 1.0 - branch_s;
        self
    }

    pub fn laser(&self, label: LaserLabel) -> Option<&LaserDrive> {
        self.lasers.iter().find(|l| l.label == label)
    }

    pub fn laser_mut(&mut self, label: LaserLabel) -> Option<&mut LaserDrive> {
        self.lasers.iter_mut().find(|l| l.label == label)
    }

    fn rabi(&self, label: LaserLabel) -> f64 {
        self.laser(label).map_or(0.0, |l| l.rabi_frequency)
    }

    fn eta(&self, label: LaserLabel) -> f64 {
        self.laser(label).map_or(0.0, |l| l.lamb_dicke(self.mode.label))
    }

    pub fn omega_pi(&self) -> f64 {
        self.rabi(LaserLabel::Pi397)
    }
    pub fn omega_sigma(&self) -> f64 {
        self.rabi(LaserLabel::Sigma397)
    }
    pub fn omega_d(&self) -> f64 {
        self.rabi(LaserLabel::D866)
    }
    pub fn eta_pi(&self) -> f64 {
        self.eta(LaserLabel::Pi397)
    }
    pub fn eta_sigma(&self) -> f64 {
        self.eta(LaserLabel::Sigma397)
    }
    pub fn eta_d(&self) -> f64 {
        self.eta(LaserLabel::D866)
    }

    /// γ = coherence decay rate of the P levels.
    pub fn gamma(&self) -> f64 {
        units::coherence_rate(self.gamma_total)
    }

    pub fn delta_s(&self) -> f64 {
        self.zeeman.delta_s()
    }

    /// Sets the σ and 866 detunings so that S-, S+ and D+ are in two-photon
    /// resonance with the π beam at the scheme's Δ.
    pub fn set_raman_resonance(&mut self) {
        let (dp, ds, dd) = raman_detunings(self.delta, self.delta_s());
        for l in &mut self.lasers {
            l.detuning = match l.label {
                LaserLabel::Pi397 => dp,
                LaserLabel::Sigma397 => ds,
                LaserLabel::D866 => dd,
            };
        }
    }

    pub fn validate(&self) -> Result<()> {
        for l in &self.lasers {
            l.validate()?;
        }
        for (i, a) in self.lasers.iter().enumerate() {
            if self.lasers[i + 1..].iter().any(|b| b.label == a.label) {
                return Err(invalid(alloc::format!("laser {} configured twice", a.label)));
            }
        }
        if !(self.mode.frequency > 0.0) || !self.mode.frequency.is_finite() {
            return Err(invalid("trap frequency must be > 0"));
        }
        if !(self.mode.background_heating >= 0.0) {
            return Err(invalid("background heating must be >= 0"));
        }
        if !(self.gamma_total > 0.0) {
            return Err(invalid("gamma_total must be > 0"));
        }
        if !(self.branch_s > 0.0 && self.branch_s <= 1.0)
            || !(self.branch_d >= 0.0 && self.branch_d < 1.0)
            || (self.branch_s + self.branch_d - 1.0).abs() > 1e-12
        {
            return Err(invalid("branch fractions must satisfy 0 < branch_s <= 1, branch_d = 1 - branch_s"));
        }
        if !self.delta.is_finite() || !self.zeeman.delta_s().is_finite() {
            return Err(invalid("detuning and field must be finite"));
        }
        Ok(())
    }
}
