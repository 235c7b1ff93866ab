//! Pulse sequences: consecutive cooling pulses applied to each mode, the
//! state carried over from one pulse to the next.

use alloc::string::String;
use alloc::vec::Vec;

use crate::lindblad::{propagate_scheme, PropagationOptions, QuantumState, RunStats, Trajectory};
use crate::model::{CoolingScheme, FockDistribution, Level, TrapMode};
use crate::{error::invalid, Result};

#[derive(Debug, Clone, PartialEq)]
pub struct Pulse {
    pub name: String,
    /// Beams, field and Δ for this pulse. Its `mode` is replaced by the mode
    /// being cooled, so the Lamb-Dicke projections come from the beam
    /// geometry.
    pub scheme: CoolingScheme,
    pub duration: f64,
}

#[derive(Debug, Clone, PartialEq, Default)]
pub struct PulseSequence {
    pub pulses: Vec<Pulse>,
}

impl PulseSequence {
    pub fn new(pulses: Vec<Pulse>) -> Self {
        PulseSequence { pulses }
    }

    pub fn total_duration(&self) -> f64 {
        self.pulses.iter().map(|p| p.duration).sum()
    }
}

/// Occupation at the end of one pulse.
#[derive(Debug, Clone, PartialEq)]
pub struct PulseEnd {
    pub name: String,
    pub time: f64,
    pub nbar: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ModeRun {
    pub mode: TrapMode,
    pub trajectory: Trajectory,
    pub pulse_ends: Vec<PulseEnd>,
    pub final_state: QuantumState,
    pub steps: usize,
}

impl ModeRun {
    pub fn final_nbar(&self) -> f64 {
        self.final_state.nbar()
    }
}

/// Runs every pulse on one mode, starting from a thermal state with n̄₀ and
/// the electron in |S+⟩. Zero-duration pulses leave the state unchanged.
pub fn run_mode(
    seq: &PulseSequence,
    mode: TrapMode,
    nbar0: f64,
    fock_dim: usize,
    opts: &PropagationOptions,
) -> Result<ModeRun> {
    if seq.pulses.is_empty() {
        return Err(invalid("pulse sequence is empty"));
    }
    let fock = FockDistribution::thermal(nbar0, fock_dim)?;
    let mut state = QuantumState::product(Level::SPlus, &fock)?;
    let mut trajectory = Trajectory::default();
    trajectory.record(&state);
    let mut pulse_ends = Vec::with_capacity(seq.pulses.len());
    let mut steps = 0;
    for p in &seq.pulses {
        if !(p.duration >= 0.0) || !p.duration.is_finite() {
            return Err(invalid(alloc::format!("pulse `{}`: duration must be finite and >= 0", p.name)));
        }
        if p.duration > 0.0 {
            let mut scheme = p.scheme.clone();
            scheme.mode = mode;
            let offset = state.time;
            let mut local = state.clone();
            local.time = 0.0;
            let (traj, mut end, RunStats { steps: s, .. }) = propagate_scheme(&scheme, &local, p.duration, opts)?;
            trajectory.extend_shifted(&traj, offset);
            end.time = offset + p.duration;
            state = end;
            steps += s;
        }
        pulse_ends.push(PulseEnd { name: p.name.clone(), time: state.time, nbar: state.nbar() });
    }
    Ok(ModeRun { mode, trajectory, pulse_ends, final_state: state, steps })
}

/// [`run_mode`] for each (mode, n̄₀) in turn.
pub fn run_sequence(
    seq: &PulseSequence,
    modes: &[(TrapMode, f64)],
    fock_dim: usize,
    opts: &PropagationOptions,
) -> Result<Vec<ModeRun>> {
    modes.iter().map(|&(m, n0)| run_mode(seq, m, n0, fock_dim, opts)).collect()
}
