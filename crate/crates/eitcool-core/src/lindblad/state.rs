use alloc::format;
use alloc::string::String;
use alloc::vec::Vec;

use crate::linalg::{hermitian_eigenvalues, CMatrix, CVector};
use crate::model::{FockDistribution, Level, BASIS_ORDER, N_LEVELS};
use crate::{error::invalid, Error, Result, C64};

/// Density operator on electronic ⊗ Fock space at a given time.
#[derive(Debug, Clone, PartialEq)]
pub struct QuantumState {
    pub rho: CMatrix,
    pub time: f64,
    pub fock_dim: usize,
}

impl QuantumState {
    pub fn new(rho: CMatrix, time: f64, fock_dim: usize) -> Result<Self> {
        let d = N_LEVELS * fock_dim;
        if rho.nrows() != d || rho.ncols() != d {
            return Err(invalid(format!("density matrix must be {d}x{d} for fock_dim {fock_dim}")));
        }
        Ok(QuantumState { rho, time, fock_dim })
    }

    /// |level⟩⟨level| ⊗ Σ p_n |n⟩⟨n|.
    pub fn product(level: Level, fock: &FockDistribution) -> Result<Self> {
        let n = fock.len();
        let d = N_LEVELS * n;
        let mut rho = CMatrix::zeros(d, d);
        for (k, p) in fock.populations.iter().enumerate() {
            let i = level.index() * n + k;
            rho[(i, i)] = C64::new(*p, 0.0);
        }
        QuantumState::new(rho, 0.0, n)
    }

    /// Electronic state ψ (8 amplitudes) ⊗ Fock populations.
    pub fn from_electronic(psi: &CVector, fock: &FockDistribution) -> Result<Self> {
        let n = fock.len();
        let d = N_LEVELS * n;
        let mut rho = CMatrix::zeros(d, d);
        for a in 0..N_LEVELS {
            for b in 0..N_LEVELS {
                let c = psi[a] * psi[b].conj();
                if c == C64::new(0.0, 0.0) {
                    continue;
                }
                for (k, p) in fock.populations.iter().enumerate() {
                    rho[(a * n + k, b * n + k)] = c * *p;
                }
            }
        }
        QuantumState::new(rho, 0.0, n)
    }

    pub fn dim(&self) -> usize {
        self.rho.nrows()
    }

    pub fn trace(&self) -> C64 {
        self.rho.trace()
    }

    pub fn population(&self, level: Level, k: usize) -> f64 {
        let i = level.index() * self.fock_dim + k;
        self.rho[(i, i)].re
    }

    pub fn level_population(&self, level: Level) -> f64 {
        (0..self.fock_dim).map(|k| self.population(level, k)).sum()
    }

    pub fn excited_population(&self) -> f64 {
        self.level_population(Level::PMinus) + self.level_population(Level::PPlus)
    }

    pub fn fock_populations(&self) -> FockDistribution {
        let n = self.fock_dim;
        let populations = (0..n).map(|k| Level::ALL.iter().map(|&l| self.population(l, k)).sum()).collect();
        FockDistribution { populations }
    }

    pub fn nbar(&self) -> f64 {
        self.fock_populations().mean()
    }

    /// Reduced electronic density matrix (trace over Fock states).
    pub fn electronic(&self) -> CMatrix {
        let n = self.fock_dim;
        CMatrix::from_fn(N_LEVELS, N_LEVELS, |a, b| (0..n).map(|k| self.rho[(a * n + k, b * n + k)]).sum())
    }

    pub fn hermiticity_defect(&self) -> f64 {
        crate::linalg::hermitian_defect(&self.rho)
    }

    pub fn min_eigenvalue(&self) -> f64 {
        hermitian_eigenvalues(&self.rho)[0]
    }

    /// Enforces exact Hermiticity.
    pub fn symmetrize(&mut self) {
        let h = (self.rho.clone() + self.rho.adjoint()) * C64::new(0.5, 0.0);
        self.rho = h;
    }

    /// Serialises to the checkpoint format: an ASCII header line
    /// `EITCOOL-RHO v1 levels=8 fock=N time=T basis=...` terminated by a
    /// newline, then (re, im) little-endian f64 pairs of ρ in row-major order.
    pub fn to_checkpoint(&self) -> Vec<u8> {
        let header = format!(
            "EITCOOL-RHO v1 levels={} fock={} time={:e} basis={}\n",
            N_LEVELS, self.fock_dim, self.time, BASIS_ORDER
        );
        let d = self.dim();
        let mut out = Vec::with_capacity(header.len() + 16 * d * d);
        out.extend_from_slice(header.as_bytes());
        for r in 0..d {
            for c in 0..d {
                let z = self.rho[(r, c)];
                out.extend_from_slice(&z.re.to_le_bytes());
                out.extend_from_slice(&z.im.to_le_bytes());
            }
        }
        out
    }

    pub fn from_checkpoint(bytes: &[u8]) -> Result<Self> {
        let bad = |m: &str| Error::InvalidParameter(format!("checkpoint: {m}"));
        let nl = bytes.iter().position(|&b| b == b'\n').ok_or_else(|| bad("missing header"))?;
        let header = core::str::from_utf8(&bytes[..nl]).map_err(|_| bad("header is not UTF-8"))?;
        let mut fields = header.split(' ');
        if fields.next() != Some("EITCOOL-RHO") || fields.next() != Some("v1") {
            return Err(bad("unknown format"));
        }
        let mut levels = None;
        let mut fock = None;
        let mut time = None;
        let mut basis = String::new();
        for f in fields {
            if let Some(v) = f.strip_prefix("levels=") {
                levels = v.parse::<usize>().ok();
            } else if let Some(v) = f.strip_prefix("fock=") {
                fock = v.parse::<usize>().ok();
            } else if let Some(v) = f.strip_prefix("time=") {
                time = v.parse::<f64>().ok();
            } else if let Some(v) = f.strip_prefix("basis=") {
                basis.push_str(v);
            } else if !basis.is_empty() {
                basis.push(' ');
                basis.push_str(f);
            }
        }
        if levels != Some(N_LEVELS) {
            return Err(bad("level count mismatch"));
        }
        if basis != BASIS_ORDER {
            return Err(bad("basis ordering mismatch"));
        }
        let fock = fock.ok_or_else(|| bad("missing fock"))?;
        let time = time.ok_or_else(|| bad("missing time"))?;
        let d = N_LEVELS * fock;
        let body = &bytes[nl + 1..];
        if body.len() != 16 * d * d {
            return Err(bad("payload length does not match dimensions"));
        }
        let mut rho = CMatrix::zeros(d, d);
        for (k, chunk) in body.chunks_exact(16).enumerate() {
            let re = f64::from_le_bytes(chunk[..8].try_into().unwrap_or([0; 8]));
            let im = f64::from_le_bytes(chunk[8..].try_into().unwrap_or([0; 8]));
            rho[(k / d, k % d)] = C64::new(re, im);
        }
        QuantumState::new(rho, time, fock)
    }
}

/// Time series of observables from one propagation.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct Trajectory {
    pub times: Vec<f64>,
    pub nbar: Vec<f64>,
    pub p_excited: Vec<f64>,
    pub fock_populations: Vec<FockDistribution>,
    pub traces: Vec<f64>,
    pub truncation_warnings: Vec<crate::model::TruncationWarning>,
}

impl Trajectory {
    pub fn record(&mut self, state: &QuantumState) {
        let fock = state.fock_populations();
        if let Some(w) = fock.truncation_warning(state.time) {
            self.truncation_warnings.push(w);
        }
        self.times.push(state.time);
        self.nbar.push(fock.mean());
        self.p_excited.push(state.excited_population());
        self.traces.push(state.trace().re);
        self.fock_populations.push(fock);
    }

    pub fn len(&self) -> usize {
        self.times.len()
    }

    pub fn is_empty(&self) -> bool {
        self.times.is_empty()
    }

    /// Appends another trajectory, shifting its times by `offset`; the first
    /// point of `other` is dropped when it duplicates the last point here.
    pub fn extend_shifted(&mut self, other: &Trajectory, offset: f64) {
        let skip = usize::from(!self.is_empty() && !other.is_empty());
        for i in skip..other.len() {
            self.times.push(other.times[i] + offset);
            self.nbar.push(other.nbar[i]);
            self.p_excited.push(other.p_excited[i]);
            self.traces.push(other.traces[i]);
            self.fock_populations.push(other.fock_populations[i].clone());
        }
        for w in &other.truncation_warnings {
            let mut w = *w;
            w.time += offset;
            self.truncation_warnings.push(w);
        }
    }
}
