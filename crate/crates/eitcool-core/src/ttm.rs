//! Dynamical maps on vibrational populations, transfer tensors, long-time
//! extrapolation and the time-dependent rate R(t, n̄₀) = κ(t)/C(t).
//!
//! Maps act on Fock populations only; vibrational coherences are traced out.

use alloc::format;
use alloc::vec;
use alloc::vec::Vec;

use nalgebra::{DMatrix, DVector};

use crate::lambdicke::RateMatrix;
use crate::lindblad::{propagate_scheme, PropagationOptions, QuantumState};
use crate::model::{CoolingScheme, FockDistribution, Level};
use crate::units::{HBAR, K_B};
use crate::{error::invalid, Error, Result};

#[allow(unused_imports)]
use num_traits::Float;

/// Column sums of extracted maps must be 1 within this.
pub const COLUMN_SUM_TOLERANCE: f64 = 1e-8;
/// Extrapolated maps whose 1-norm exceeds 1 + this are rejected.
pub const NORM_GROWTH_LIMIT: f64 = 1e-3;
/// Default map step in units of 1/Γ.
pub const DEFAULT_DT_GAMMA: f64 = 0.05;
pub const DEFAULT_STEPS: usize = 200;

/// Produces the vibrational populations reached from a single Fock state.
pub trait PopulationPropagator: Sync {
    fn fock_dim(&self) -> usize;
    /// Populations after `1..=steps` steps of `dt`, starting from |n⟩.
    fn column(&self, initial: usize, dt: f64, steps: usize) -> Result<Vec<Vec<f64>>>;

    /// The whole map series; column by column unless overridden.
    fn maps(&self, dt: f64, steps: usize) -> Result<DynamicalMapSeries> {
        let columns: Vec<_> = (0..self.fock_dim()).map(|m| self.column(m, dt, steps)).collect::<Result<_>>()?;
        DynamicalMapSeries::from_columns(dt, &columns)
    }
}

/// Markovian propagator of the Lamb-Dicke rate equation.
pub struct RateEquationPropagator {
    pub matrix: RateMatrix,
}

impl PopulationPropagator for RateEquationPropagator {
    fn fock_dim(&self) -> usize {
        self.matrix.dimension()
    }

    fn column(&self, initial: usize, dt: f64, steps: usize) -> Result<Vec<Vec<f64>>> {
        let step = self.matrix.transition(dt)?;
        let mut v = DVector::zeros(self.fock_dim());
        v[initial] = 1.0;
        let mut out = Vec::with_capacity(steps);
        for _ in 0..steps {
            v = &step * v;
            out.push(v.iter().copied().collect());
        }
        Ok(out)
    }

    /// The semigroup E_k = E_1^k.
    fn maps(&self, dt: f64, steps: usize) -> Result<DynamicalMapSeries> {
        if steps == 0 {
            return Err(invalid("steps must be >= 1"));
        }
        let step = self.matrix.transition(dt)?;
        let mut maps = Vec::with_capacity(steps);
        maps.push(step.clone());
        for k in 1..steps {
            let next = &step * &maps[k - 1];
            maps.push(next);
        }
        Ok(DynamicalMapSeries { dt, maps })
    }
}

/// Full master-equation propagator: |level⟩⊗|n⟩ is evolved and the Fock
/// populations are read out after tracing the electronic state.
pub struct MasterEquationPropagator {
    pub scheme: CoolingScheme,
    pub fock_dim: usize,
    pub level: Level,
    pub tolerance: f64,
}

impl MasterEquationPropagator {
    pub fn new(scheme: CoolingScheme, fock_dim: usize) -> Self {
        MasterEquationPropagator { scheme, fock_dim, level: Level::SPlus, tolerance: crate::lindblad::DEFAULT_TOLERANCE }
    }
}

impl PopulationPropagator for MasterEquationPropagator {
    fn fock_dim(&self) -> usize {
        self.fock_dim
    }

    fn column(&self, initial: usize, dt: f64, steps: usize) -> Result<Vec<Vec<f64>>> {
        let fock = FockDistribution::fock(initial, self.fock_dim)?;
        let state = QuantumState::product(self.level, &fock)?;
        let times: Vec<f64> = (1..=steps).map(|k| k as f64 * dt).collect();
        let opts = PropagationOptions { tolerance: self.tolerance, times: Some(times), ..Default::default() };
        let (traj, _, _) = propagate_scheme(&self.scheme, &state, steps as f64 * dt, &opts)?;
        Ok(traj.fock_populations.into_iter().map(|f| f.populations).collect())
    }
}

/// E_k for k = 1..=K on a uniform grid; E_0 = 1 is implied.
#[derive(Debug, Clone, PartialEq)]
pub struct DynamicalMapSeries {
    pub dt: f64,
    pub maps: Vec<DMatrix<f64>>,
}

impl DynamicalMapSeries {
    /// Assembles maps from per-initial-state columns: `columns[m][k]` is the
    /// population vector at step k+1 starting from |m⟩.
    pub fn from_columns(dt: f64, columns: &[Vec<Vec<f64>>]) -> Result<Self> {
        let n = columns.len();
        if n == 0 {
            return Err(Error::NoData("no columns".into()));
        }
        let steps = columns[0].len();
        if steps == 0 || columns.iter().any(|c| c.len() != steps || c.iter().any(|v| v.len() != n)) {
            return Err(invalid("columns must share one step count and the basis dimension"));
        }
        let mut maps = Vec::with_capacity(steps);
        for k in 0..steps {
            let e = DMatrix::from_fn(n, n, |i, m| columns[m][k][i]);
            for m in 0..n {
                let s: f64 = e.column(m).iter().sum();
                if (s - 1.0).abs() > COLUMN_SUM_TOLERANCE {
                    return Err(invalid(format!("map column {m} at step {} sums to {s}", k + 1)));
                }
            }
            maps.push(e);
        }
        Ok(DynamicalMapSeries { dt, maps })
    }

    pub fn len(&self) -> usize {
        self.maps.len()
    }

    pub fn is_empty(&self) -> bool {
        self.maps.is_empty()
    }

    pub fn dim(&self) -> usize {
        self.maps.first().map_or(0, |m| m.nrows())
    }

    /// E_k with E_0 = 1.
    pub fn map(&self, k: usize) -> DMatrix<f64> {
        if k == 0 {
            DMatrix::identity(self.dim(), self.dim())
        } else {
            self.maps[k - 1].clone()
        }
    }

    pub fn times(&self) -> Vec<f64> {
        (1..=self.len()).map(|k| k as f64 * self.dt).collect()
    }

    /// n̄ at every step starting from `p0`, including t = 0.
    pub fn nbar_series(&self, p0: &FockDistribution) -> Result<Vec<f64>> {
        if p0.len() != self.dim() {
            return Err(invalid("initial distribution does not match the map dimension"));
        }
        let v = nalgebra::DVector::from_column_slice(&p0.populations);
        let mut out = vec![p0.mean()];
        for e in &self.maps {
            let p = e * &v;
            out.push(p.iter().enumerate().map(|(n, x)| n as f64 * x).sum());
        }
        Ok(out)
    }
}

/// Builds the map series column by column from a propagator.
pub fn extract_maps<P: PopulationPropagator + ?Sized>(prop: &P, dt: f64, steps: usize) -> Result<DynamicalMapSeries> {
    if !(dt > 0.0) || steps == 0 {
        return Err(invalid("dt must be > 0 and steps >= 1"));
    }
    prop.maps(dt, steps)
}

/// Transfer tensors T_1..T_K.
#[derive(Debug, Clone, PartialEq)]
pub struct TransferTensors {
    pub dt: f64,
    pub tensors: Vec<DMatrix<f64>>,
}

/// T_1 = E_1, T_k = E_k − Σ_{m=1}^{k−1} T_m E_{k−m}.
pub fn transfer_tensors(series: &DynamicalMapSeries) -> Result<TransferTensors> {
    if series.len() < 2 {
        return Err(invalid("need at least two maps"));
    }
    let mut tensors: Vec<DMatrix<f64>> = Vec::with_capacity(series.len());
    for k in 1..=series.len() {
        let mut t = series.maps[k - 1].clone();
        for m in 1..k {
            t -= &tensors[m - 1] * &series.maps[k - m - 1];
        }
        tensors.push(t);
    }
    Ok(TransferTensors { dt: series.dt, tensors })
}

impl TransferTensors {
    /// max_k ‖E_k − Σ_m T_m E_{k−m}‖_max over the training window.
    pub fn reconstruction_error(&self, series: &DynamicalMapSeries) -> f64 {
        let mut worst: f64 = 0.0;
        for k in 1..=series.len().min(self.tensors.len()) {
            let mut r = series.map(k);
            for m in 1..=k {
                r -= &self.tensors[m - 1] * series.map(k - m);
            }
            worst = worst.max(r.amax());
        }
        worst
    }
}

fn one_norm(m: &DMatrix<f64>) -> f64 {
    m.column_iter().map(|c| c.iter().map(|x| x.abs()).sum::<f64>()).fold(0.0, f64::max)
}

/// Extends the series to `horizon` steps with the transfer-tensor
/// recursion, using the first `memory` tensors.
pub fn extrapolate_with_memory(
    tensors: &TransferTensors,
    series: &DynamicalMapSeries,
    horizon: usize,
    memory: usize,
) -> Result<DynamicalMapSeries> {
    let memory = memory.min(tensors.tensors.len());
    if memory == 0 {
        return Err(invalid("memory must be >= 1"));
    }
    let mut maps: Vec<DMatrix<f64>> = series.maps.iter().take(horizon).cloned().collect();
    let id = DMatrix::identity(series.dim(), series.dim());
    for k in series.len() + 1..=horizon {
        let mut e = DMatrix::zeros(series.dim(), series.dim());
        for m in 1..=memory.min(k) {
            let prev = if k == m { &id } else { &maps[k - m - 1] };
            e += &tensors.tensors[m - 1] * prev;
        }
        let norm = one_norm(&e);
        let drift = e.column_iter().map(|c| (c.sum() - 1.0).abs()).fold(0.0, f64::max);
        if norm > 1.0 + NORM_GROWTH_LIMIT || drift > 1e-6 {
            return Err(Error::Unstable { norm: norm.max(1.0 + drift), step: k });
        }
        maps.push(e);
    }
    Ok(DynamicalMapSeries { dt: series.dt, maps })
}

pub fn extrapolate(tensors: &TransferTensors, series: &DynamicalMapSeries, horizon: usize) -> Result<DynamicalMapSeries> {
    extrapolate_with_memory(tensors, series, horizon, tensors.tensors.len())
}

/// Response quantities at one time.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ThermoResponse {
    pub t: f64,
    /// ⟨(δH)²⟩(t) = Σ_m Σ_n (ħν(n−m))² E_{n,m} p_m, J².
    pub var_dh: f64,
    /// ⟨H²⟩(t) = Σ_m Σ_n (ħνn)² E_{n,m} p_m, J².
    pub var_transfer: f64,
    /// C(t) = ∂⟨H⟩(t)/∂T, J/K.
    pub capacitance: f64,
    /// κ(t) = ∂J(t)/∂T = −dC/dt, W/K.
    pub conductance: f64,
    /// κ/C, or `None` where C vanishes.
    pub rate: Option<f64>,
}

/// β ħν of a thermal state with mean occupation n̄₀ (untruncated).
pub fn beta_hbar_nu(nbar0: f64) -> Result<f64> {
    if !(nbar0 > 0.0) || !nbar0.is_finite() {
        return Err(invalid("initial nbar must be finite and > 0"));
    }
    Ok((1.0 + 1.0 / nbar0).ln())
}

/// Time-dependent rate from a map series for a thermal initial state with
/// occupation n̄₀ (the Boltzmann weights are renormalised on the truncated
/// space).
///
/// C(t) is obtained by differentiating ⟨H⟩(t) = Σ ħνn E_{n,m}(t) p_m(T)
/// through the weights, ∂p_m/∂T = k_Bβ²(E_m − ⟨H⟩₀)p_m, so
/// C(t) = k_Bβ²·Cov(H_t, H_0) under the two-time distribution E_{n,m}p_m.
/// Derivatives in t use centered differences (5 points in the interior, 3
/// next to the ends); the end points are omitted.
pub fn generalized_rate(series: &DynamicalMapSeries, nbar0: f64, nu: f64) -> Result<Vec<ThermoResponse>> {
    if series.len() < 3 {
        return Err(Error::NoData("need at least three maps".into()));
    }
    if !(nu > 0.0) {
        return Err(invalid("nu must be > 0"));
    }
    let x = beta_hbar_nu(nbar0)?;
    let n = series.dim();
    let p = FockDistribution::boltzmann(x, n)?;
    let h0 = p.mean();
    let quantum = HBAR * nu;
    let beta = x / quantum;
    let scale = K_B * beta * beta * quantum * quantum;

    let k_max = series.len();
    // Unscaled covariance (units of quanta²) at k = 0..=K.
    let mut cov = Vec::with_capacity(k_max + 1);
    let mut var_dh = Vec::with_capacity(k_max + 1);
    let mut var_tr = Vec::with_capacity(k_max + 1);
    for k in 0..=k_max {
        let e = series.map(k);
        let (mut c, mut dh, mut tr) = (0.0, 0.0, 0.0);
        for m in 0..n {
            let w = p.populations[m];
            for i in 0..n {
                let pe = e[(i, m)] * w;
                let nf = i as f64;
                c += nf * (m as f64 - h0) * pe;
                dh += (nf - m as f64).powi(2) * pe;
                tr += nf * nf * pe;
            }
        }
        cov.push(c);
        var_dh.push(dh * quantum * quantum);
        var_tr.push(tr * quantum * quantum);
    }
    let dt = series.dt;
    let mut out = Vec::with_capacity(k_max);
    for k in 1..k_max {
        let d = if k >= 2 && k + 2 <= k_max {
            (cov[k - 2] - 8.0 * cov[k - 1] + 8.0 * cov[k + 1] - cov[k + 2]) / (12.0 * dt)
        } else {
            (cov[k + 1] - cov[k - 1]) / (2.0 * dt)
        };
        let c = cov[k];
        let rate = (c.abs() > 1e-300 * (1.0 + h0)).then(|| -d / c);
        out.push(ThermoResponse {
            t: k as f64 * dt,
            var_dh: var_dh[k],
            var_transfer: var_tr[k],
            capacitance: scale * c,
            conductance: -scale * d,
            rate,
        });
    }
    Ok(out)
}
