use alloc::format;
use alloc::vec;
use alloc::vec::Vec;

use super::scheme::{CouplingModel, CoolingScheme, LaserLabel, Level, N_LEVELS};
use crate::linalg::{displacement, CMatrix, CVector};
use crate::{error::invalid, Result, C64};

#[allow(unused_imports)]
use num_traits::Float;

/// One optical coupling |g⟩⟨e| driven by one laser.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Coupling {
    pub laser: LaserLabel,
    pub ground: Level,
    pub excited: Level,
    /// Ω·w/2 in rad/s, w the relative dipole weight.
    pub amplitude: f64,
    /// Lamb-Dicke projection on the simulated mode.
    pub eta: f64,
}

/// One spontaneous-emission channel e → g.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Decay {
    pub excited: Level,
    pub ground: Level,
    /// Γ_j in 1/s.
    pub rate: f64,
}

/// Scheme reduced to the numbers every engine needs: rotating-frame level
/// energies, the coupling list, the decay channels and the mode.
#[derive(Debug, Clone, PartialEq)]
pub struct StructuredModel {
    pub energies: [f64; N_LEVELS],
    pub couplings: Vec<Coupling>,
    pub decays: Vec<Decay>,
    pub nu: f64,
    pub heating: f64,
    pub gamma_total: f64,
}

/// Relative dipole weight for a transition driven by a laser, or `None` if
/// the laser's polarization does not drive it.
fn dipole_weight(label: LaserLabel, pol: super::Polarization, g: Level, e: Level) -> Option<f64> {
    let two_dm = e.two_m() - g.two_m();
    if !pol.drives(two_dm) {
        return None;
    }
    match label {
        LaserLabel::Pi397 | LaserLabel::Sigma397 => g.is_s().then_some(1.0),
        LaserLabel::D866 => {
            if g.is_s() {
                None
            } else if g.two_m().abs() == 3 {
                Some(3f64.sqrt())
            } else if two_dm == 0 {
                Some(2f64.sqrt())
            } else {
                Some(1.0)
            }
        }
    }
}

fn lambda_allows(label: LaserLabel, g: Level, e: Level) -> bool {
    match label {
        LaserLabel::Pi397 => g == Level::SPlus && e == Level::PPlus,
        LaserLabel::Sigma397 => g == Level::SMinus && e == Level::PPlus,
        LaserLabel::D866 => false,
    }
}

/// Laser couplings of the scheme on its own mode.
pub fn couplings(scheme: &CoolingScheme) -> Vec<Coupling> {
    let mut out = Vec::new();
    for laser in &scheme.lasers {
        let eta = laser.lamb_dicke(scheme.mode.label);
        for e in [Level::PMinus, Level::PPlus] {
            for g in Level::ALL.iter().copied().filter(|l| !l.is_excited()) {
                let Some(w) = dipole_weight(laser.label, laser.polarization, g, e) else { continue };
                if scheme.coupling == CouplingModel::Lambda && !lambda_allows(laser.label, g, e) {
                    continue;
                }
                if laser.rabi_frequency == 0.0 {
                    continue;
                }
                out.push(Coupling {
                    laser: laser.label,
                    ground: g,
                    excited: e,
                    amplitude: 0.5 * laser.rabi_frequency * w,
                    eta,
                });
            }
        }
    }
    out
}

/// Zeeman pattern g_J·m for each level (S: ±1, P: ±1/3, D: ±6/5, ±2/5).
pub fn zeeman_pattern(level: Level) -> f64 {
    let m2 = level.two_m() as f64;
    match level {
        Level::SMinus | Level::SPlus => m2,
        Level::PMinus | Level::PPlus => m2 / 3.0,
        _ => 0.4 * m2,
    }
}

/// Rotating-frame energies. Each laser coupling fixes E_g − E_e to the laser
/// detuning; the frame is grown from |P+⟩ at zero along the couplings, and
/// levels not reached keep energy zero. The Zeeman term enters as
/// −(Δ_s/2)·g_J m, which places the Raman-resonant ground states S± and D+
/// at a common energy.
fn frame_energies(scheme: &CoolingScheme, couplings: &[Coupling]) -> Result<[f64; N_LEVELS]> {
    let mut e = [0.0; N_LEVELS];
    let mut known = [false; N_LEVELS];
    let detuning = |label: LaserLabel| scheme.laser(label).map_or(0.0, |l| l.detuning);
    let mut roots = vec![Level::PPlus, Level::PMinus];
    roots.extend(Level::ALL.iter().copied().filter(|l| !l.is_excited()));
    for root in roots {
        if known[root.index()] {
            continue;
        }
        known[root.index()] = true;
        loop {
            let mut progressed = false;
            for c in couplings {
                let (g, x, d) = (c.ground.index(), c.excited.index(), detuning(c.laser));
                match (known[g], known[x]) {
                    (true, false) => {
                        e[x] = e[g] - d;
                        known[x] = true;
                        progressed = true;
                    }
                    (false, true) => {
                        e[g] = e[x] + d;
                        known[g] = true;
                        progressed = true;
                    }
                    (true, true) => {
                        let scale = 1.0 + e[g].abs() + e[x].abs() + d.abs();
                        if (e[g] - e[x] - d).abs() > 1e-12 * scale {
                            return Err(invalid(format!(
                                "no time-independent rotating frame: {} closes a loop through {}-{} inconsistently",
                                c.laser,
                                c.ground.name(),
                                c.excited.name()
                            )));
                        }
                    }
                    (false, false) => {}
                }
            }
            if !progressed {
                break;
            }
        }
    }
    let u = -0.5 * scheme.delta_s();
    for l in Level::ALL {
        e[l.index()] += u * zeeman_pattern(l);
    }
    Ok(e)
}

/// Decay channels with Clebsch-Gordan branching inside each manifold.
pub fn decays(scheme: &CoolingScheme) -> Vec<Decay> {
    let g = scheme.gamma_total;
    // The Lambda model is closed: every decay returns to the S manifold.
    let (bs, bd) = match scheme.coupling {
        CouplingModel::Full => (scheme.branch_s, scheme.branch_d),
        CouplingModel::Lambda => (1.0, 0.0),
    };
    let table: [(Level, Level, f64); 10] = [
        (Level::PPlus, Level::SPlus, bs / 3.0),
        (Level::PPlus, Level::SMinus, 2.0 * bs / 3.0),
        (Level::PMinus, Level::SMinus, bs / 3.0),
        (Level::PMinus, Level::SPlus, 2.0 * bs / 3.0),
        (Level::PPlus, Level::DPlus3, bd / 2.0),
        (Level::PPlus, Level::DPlus, bd / 3.0),
        (Level::PPlus, Level::DMinus, bd / 6.0),
        (Level::PMinus, Level::DMinus3, bd / 2.0),
        (Level::PMinus, Level::DMinus, bd / 3.0),
        (Level::PMinus, Level::DPlus, bd / 6.0),
    ];
    table
        .iter()
        .filter(|(_, _, f)| *f > 0.0)
        .map(|&(excited, ground, f)| Decay { excited, ground, rate: g * f })
        .collect()
}

impl StructuredModel {
    pub fn new(scheme: &CoolingScheme) -> Result<Self> {
        scheme.validate()?;
        let couplings = couplings(scheme);
        let energies = frame_energies(scheme, &couplings)?;
        Ok(StructuredModel {
            energies,
            couplings,
            decays: decays(scheme),
            nu: scheme.mode.frequency,
            heating: scheme.mode.background_heating,
            gamma_total: scheme.gamma_total,
        })
    }

    /// Electronic Hamiltonian with all recoil factors set to one.
    pub fn electronic_hamiltonian(&self) -> CMatrix {
        let mut h = CMatrix::zeros(N_LEVELS, N_LEVELS);
        for (i, e) in self.energies.iter().enumerate() {
            h[(i, i)] = C64::new(*e, 0.0);
        }
        for c in &self.couplings {
            let (g, e) = (c.ground.index(), c.excited.index());
            h[(g, e)] += C64::new(c.amplitude, 0.0);
            h[(e, g)] += C64::new(c.amplitude, 0.0);
        }
        h
    }

    /// First-order motional coupling σ_η, the coefficient of (b+b†) in the
    /// expansion of the recoil factors.
    pub fn cooling_operator(&self) -> CMatrix {
        let mut s = CMatrix::zeros(N_LEVELS, N_LEVELS);
        for c in &self.couplings {
            let (g, e) = (c.ground.index(), c.excited.index());
            let z = C64::new(0.0, c.eta * c.amplitude);
            s[(g, e)] += z;
            s[(e, g)] += z.conj();
        }
        s
    }
}

/// Dense operators on the electronic ⊗ Fock space.
#[derive(Debug, Clone)]
pub struct OperatorSet {
    pub hamiltonian: CMatrix,
    pub collapse_ops: Vec<CollapseOp>,
    pub fock_dim: usize,
}

/// A Lindblad jump operator with its rate; the operator itself is normalised
/// (|g⟩⟨e| ⊗ 1, b or b†).
#[derive(Debug, Clone)]
pub struct CollapseOp {
    pub rate: f64,
    pub operator: CMatrix,
    pub channel: Channel,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Channel {
    Spontaneous { excited: Level, ground: Level },
    PhononLoss,
    PhononGain,
}

impl OperatorSet {
    pub fn dim(&self) -> usize {
        N_LEVELS * self.fock_dim
    }

    pub fn displacement(&self, eta: f64) -> CMatrix {
        displacement(eta, self.fock_dim)
    }
}

fn check_fock(fock_dim: usize) -> Result<()> {
    if fock_dim < 2 {
        return Err(invalid(format!("fock_dim must be >= 2, got {fock_dim}")));
    }
    Ok(())
}

/// Index of |level, n⟩ in the product basis.
pub const fn basis_index(level: Level, n: usize, fock_dim: usize) -> usize {
    level.index() * fock_dim + n
}

/// Full Hamiltonian H = ν b†b + Σ E_a|a⟩⟨a| + Σ (Ω w/2)(|g⟩⟨e| ⊗ e^{iη(b+b†)} + h.c.).
pub fn build_hamiltonian(scheme: &CoolingScheme, fock_dim: usize) -> Result<CMatrix> {
    check_fock(fock_dim)?;
    let model = StructuredModel::new(scheme)?;
    let n = fock_dim;
    let dim = N_LEVELS * n;
    let mut h = CMatrix::zeros(dim, dim);
    for l in Level::ALL {
        for k in 0..n {
            let i = basis_index(l, k, n);
            h[(i, i)] = C64::new(model.energies[l.index()] + model.nu * k as f64, 0.0);
        }
    }
    for c in &model.couplings {
        let d = displacement(c.eta, n);
        for i in 0..n {
            for j in 0..n {
                let v = d[(i, j)] * c.amplitude;
                let (r, s) = (basis_index(c.ground, i, n), basis_index(c.excited, j, n));
                h[(r, s)] += v;
                h[(s, r)] += v.conj();
            }
        }
    }
    Ok(h)
}

/// Jump operators: one per decay dipole, plus b and b† at the background
/// heating rate when it is nonzero.
pub fn build_collapse_ops(scheme: &CoolingScheme, fock_dim: usize) -> Result<Vec<CollapseOp>> {
    check_fock(fock_dim)?;
    scheme.validate()?;
    let n = fock_dim;
    let dim = N_LEVELS * n;
    let mut out = Vec::new();
    for d in decays(scheme) {
        let mut op = CMatrix::zeros(dim, dim);
        for k in 0..n {
            op[(basis_index(d.ground, k, n), basis_index(d.excited, k, n))] = C64::new(1.0, 0.0);
        }
        out.push(CollapseOp {
            rate: d.rate,
            operator: op,
            channel: Channel::Spontaneous { excited: d.excited, ground: d.ground },
        });
    }
    let r = scheme.mode.background_heating;
    if r > 0.0 {
        let mut lower = CMatrix::zeros(dim, dim);
        for l in Level::ALL {
            for k in 1..n {
                lower[(basis_index(l, k - 1, n), basis_index(l, k, n))] = C64::new((k as f64).sqrt(), 0.0);
            }
        }
        let raise = lower.adjoint();
        out.push(CollapseOp { rate: r, operator: lower, channel: Channel::PhononLoss });
        out.push(CollapseOp { rate: r, operator: raise, channel: Channel::PhononGain });
    }
    Ok(out)
}

pub fn build_operators(scheme: &CoolingScheme, fock_dim: usize) -> Result<OperatorSet> {
    Ok(OperatorSet {
        hamiltonian: build_hamiltonian(scheme, fock_dim)?,
        collapse_ops: build_collapse_ops(scheme, fock_dim)?,
        fock_dim,
    })
}

fn basis_vector(pairs: &[(Level, f64)]) -> CVector {
    let mut v = CVector::zeros(N_LEVELS);
    for &(l, a) in pairs {
        v[l.index()] = C64::new(a, 0.0);
    }
    v
}

/// Single-EIT dark state (Ω_π|S-⟩ − Ω_σ|S+⟩)/Ω.
pub fn dark_state_single(omega_pi: f64, omega_sigma: f64) -> Result<CVector> {
    let omega = omega_pi.hypot(omega_sigma);
    if !(omega > 0.0) {
        return Err(invalid("dark state needs a nonzero Rabi frequency"));
    }
    Ok(basis_vector(&[(Level::SMinus, omega_pi / omega), (Level::SPlus, -omega_sigma / omega)]))
}

/// Ω₋⁴ = Ω_D²Ω_σ² + Ω_D²Ω_π² + Ω_π⁴.
pub fn omega_minus_sq(omega_pi: f64, omega_sigma: f64, omega_d: f64) -> f64 {
    let (p2, s2, d2) = (omega_pi * omega_pi, omega_sigma * omega_sigma, omega_d * omega_d);
    (d2 * s2 + d2 * p2 + p2 * p2).sqrt()
}

/// D-EIT dark state (Ω_DΩ_σ|S+⟩ − Ω_DΩ_π|S-⟩ + Ω_π²|D+⟩)/Ω₋².
pub fn dark_state_deit(omega_pi: f64, omega_sigma: f64, omega_d: f64) -> Result<CVector> {
    let norm = omega_minus_sq(omega_pi, omega_sigma, omega_d);
    if !(norm > 0.0) {
        return Err(invalid("D-EIT dark state undefined: all Rabi frequencies vanish"));
    }
    Ok(basis_vector(&[
        (Level::SPlus, omega_d * omega_sigma / norm),
        (Level::SMinus, -omega_d * omega_pi / norm),
        (Level::DPlus, omega_pi * omega_pi / norm),
    ]))
}

/// Unnormalised |E⟩ = iσ_η|∼⟩ in closed form:
/// (Ω_πΩ_D/2Ω₋²)[Ω_σ(η_π−η_σ)|P+⟩ + Ω_π(η_D−η_π)|P-⟩].
pub fn lamb_dicke_coupling_state(scheme: &CoolingScheme) -> Result<CVector> {
    let (op, os, od) = (scheme.omega_pi(), scheme.omega_sigma(), scheme.omega_d());
    let om2 = omega_minus_sq(op, os, od);
    if !(om2 > 0.0) {
        return Err(invalid("coupling state undefined: all Rabi frequencies vanish"));
    }
    let (ep, es, ed) = (scheme.eta_pi(), scheme.eta_sigma(), scheme.eta_d());
    let c = op * od / (2.0 * om2);
    Ok(basis_vector(&[(Level::PPlus, c * os * (ep - es)), (Level::PMinus, c * op * (ed - ep))]))
}

/// Electronic Hamiltonian blocks in the frame where the Raman-resonant
/// ground states sit at zero energy: excited block (P-, P+), ground block
/// (S-, S+, D-3, D-, D+, D+3) and the ground-excited coupling.
#[derive(Debug, Clone)]
pub struct EffectiveBlocks {
    pub h_ee: CMatrix,
    pub h_gg: CMatrix,
    pub h_ge: CMatrix,
}

pub const EXCITED_LEVELS: [Level; 2] = [Level::PMinus, Level::PPlus];
pub const GROUND_LEVELS: [Level; 6] =
    [Level::SMinus, Level::SPlus, Level::DMinus3, Level::DMinus, Level::DPlus, Level::DPlus3];

pub fn effective_blocks(scheme: &CoolingScheme) -> Result<EffectiveBlocks> {
    let model = StructuredModel::new(scheme)?;
    let mut h = model.electronic_hamiltonian();
    let shift = model.energies[Level::SPlus.index()];
    for i in 0..N_LEVELS {
        h[(i, i)] -= C64::new(shift, 0.0);
    }
    let pick = |rows: &[Level], cols: &[Level]| {
        CMatrix::from_fn(rows.len(), cols.len(), |i, j| h[(rows[i].index(), cols[j].index())])
    };
    Ok(EffectiveBlocks {
        h_ee: pick(&EXCITED_LEVELS, &EXCITED_LEVELS),
        h_gg: pick(&GROUND_LEVELS, &GROUND_LEVELS),
        h_ge: pick(&GROUND_LEVELS, &EXCITED_LEVELS),
    })
}
