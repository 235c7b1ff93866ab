use alloc::format;
use alloc::vec::Vec;

use super::{BlockGenerator, DenseGenerator, Generator, Integrator, QuantumState, StepControl, Trajectory};
use crate::model::{CoolingScheme, FockDistribution, Level, OperatorSet};
use crate::{error::invalid, Error, Result};

/// Default local error per unit of Γt.
pub const DEFAULT_TOLERANCE: f64 = 1e-8;
/// Snapshots with a density-matrix eigenvalue below −this abort the run.
pub const POSITIVITY_LIMIT: f64 = 1e-6;

#[derive(Debug, Clone, PartialEq)]
pub struct PropagationOptions {
    pub tolerance: f64,
    /// Number of equal intervals between recorded snapshots.
    pub intervals: usize,
    /// Explicit snapshot times relative to the start, overriding `intervals`.
    pub times: Option<Vec<f64>>,
    pub check_positivity: bool,
}

impl Default for PropagationOptions {
    fn default() -> Self {
        PropagationOptions { tolerance: DEFAULT_TOLERANCE, intervals: 100, times: None, check_positivity: true }
    }
}

impl PropagationOptions {
    pub fn with_intervals(intervals: usize) -> Self {
        PropagationOptions { intervals, ..Default::default() }
    }

    fn grid(&self, duration: f64) -> Result<Vec<f64>> {
        if let Some(t) = &self.times {
            if t.windows(2).any(|w| !(w[1] > w[0])) || t.iter().any(|x| !(*x >= 0.0 && *x <= duration)) {
                return Err(invalid("snapshot times must be strictly increasing and within the duration"));
            }
            return Ok(t.clone());
        }
        let k = self.intervals.max(1);
        Ok((0..=k).map(|i| duration * i as f64 / k as f64).collect())
    }
}

/// Integration statistics of a finished run.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RunStats {
    pub steps: usize,
    pub rejected: usize,
    pub trace_drift: f64,
}

/// Integrates the master equation defined by `gen` and records observables
/// at the snapshot grid. `time_unit` sets the scale on which the tolerance
/// is measured (1/Γ for the ion model).
pub fn propagate_with<G: Generator + ?Sized>(
    gen: &G,
    state: &QuantumState,
    duration: f64,
    time_unit: f64,
    opts: &PropagationOptions,
) -> Result<(Trajectory, QuantumState, RunStats)> {
    if !(duration >= 0.0) || !duration.is_finite() {
        return Err(invalid("duration must be finite and >= 0"));
    }
    if state.dim() != gen.dim() {
        return Err(invalid(format!("state dimension {} does not match generator {}", state.dim(), gen.dim())));
    }
    let grid = opts.grid(duration)?;
    let t0 = state.time;
    let trace0 = state.trace().re;
    let mut rho = state.rho.clone();
    let mut t = t0;
    let mut integ = Integrator::new(gen, StepControl::new(opts.tolerance, time_unit))?;
    let mut traj = Trajectory::default();
    for &ts in &grid {
        integ.advance(&mut rho, &mut t, t0 + ts)?;
        let mut snap = QuantumState { rho: rho.clone(), time: t, fock_dim: state.fock_dim };
        snap.symmetrize();
        if opts.check_positivity {
            let min = snap.min_eigenvalue();
            if min < -POSITIVITY_LIMIT {
                return Err(Error::Positivity { time: t, min_eigenvalue: min });
            }
        }
        traj.record(&snap);
        rho = snap.rho;
    }
    if grid.last().is_none_or(|&last| last < duration) {
        integ.advance(&mut rho, &mut t, t0 + duration)?;
    }
    let mut end = QuantumState { rho, time: t0 + duration, fock_dim: state.fock_dim };
    end.symmetrize();
    let stats = RunStats { steps: integ.steps, rejected: integ.rejected, trace_drift: (end.trace().re - trace0).abs() };
    Ok((traj, end, stats))
}

/// Propagation under dense operators (Hamiltonian and jump operators as
/// built by the model). The tolerance is per unit of 1/(largest decay rate).
pub fn propagate(
    state: &QuantumState,
    ops: &OperatorSet,
    duration: f64,
    tolerance: f64,
) -> Result<(Trajectory, QuantumState, RunStats)> {
    let gen = DenseGenerator::new(ops);
    let unit = ops.collapse_ops.iter().map(|c| c.rate).fold(0.0f64, f64::max);
    let unit = if unit > 0.0 { 1.0 / unit } else { 1.0 / gen.max_rate().max(1.0) };
    propagate_with(&gen, state, duration, unit, &PropagationOptions { tolerance, ..Default::default() })
}

/// Propagation of a scheme with the matrix-free block generator.
pub fn propagate_scheme(
    scheme: &CoolingScheme,
    state: &QuantumState,
    duration: f64,
    opts: &PropagationOptions,
) -> Result<(Trajectory, QuantumState, RunStats)> {
    let gen = BlockGenerator::new(scheme, state.fock_dim)?;
    propagate_with(&gen, state, duration, 1.0 / scheme.gamma_total, opts)
}

/// Initial condition for cooling runs.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CoolingStart {
    pub nbar: f64,
    pub level: Level,
}

impl CoolingStart {
    pub fn thermal(nbar: f64) -> Self {
        CoolingStart { nbar, level: Level::SPlus }
    }
}

/// Cooling run from a thermal vibrational state with the electron pumped
/// into `start.level` (|S+⟩ by default).
pub fn cooling_trajectory(
    scheme: &CoolingScheme,
    start: CoolingStart,
    duration: f64,
    fock_dim: usize,
    opts: &PropagationOptions,
) -> Result<(Trajectory, QuantumState, RunStats)> {
    let fock = FockDistribution::thermal(start.nbar, fock_dim)?;
    let state = QuantumState::product(start.level, &fock)?;
    propagate_scheme(scheme, &state, duration, opts)
}
