//! Electronic-only (η = 0) Liouvillian: steady states and two-time
//! correlation spectra. Dense is fine here, the space has at most 64 entries.

use alloc::format;
use alloc::vec::Vec;

use crate::linalg::{solve, CMatrix, CVector};
use crate::model::{CoolingScheme, Level, StructuredModel, N_LEVELS};
use crate::{Error, Result, C64};

/// Levels that take part in the electronic dynamics: everything touched by a
/// laser, plus decay targets of those. Levels outside this set are frozen and
/// would otherwise make the stationary state degenerate.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ActiveSpace {
    pub levels: Vec<Level>,
}

impl ActiveSpace {
    pub fn new(model: &StructuredModel) -> Self {
        let mut active = [false; N_LEVELS];
        for c in &model.couplings {
            active[c.ground.index()] = true;
            active[c.excited.index()] = true;
        }
        loop {
            let mut grew = false;
            for d in &model.decays {
                if active[d.excited.index()] && !active[d.ground.index()] {
                    active[d.ground.index()] = true;
                    grew = true;
                }
            }
            if !grew {
                break;
            }
        }
        ActiveSpace { levels: Level::ALL.iter().copied().filter(|l| active[l.index()]).collect() }
    }

    pub fn len(&self) -> usize {
        self.levels.len()
    }

    pub fn is_empty(&self) -> bool {
        self.levels.is_empty()
    }

    fn position(&self, level: Level) -> Option<usize> {
        self.levels.iter().position(|&l| l == level)
    }

    /// Restricts an 8×8 operator to the active levels.
    pub fn restrict(&self, m: &CMatrix) -> CMatrix {
        let n = self.len();
        CMatrix::from_fn(n, n, |i, j| m[(self.levels[i].index(), self.levels[j].index())])
    }

    /// Embeds an active-space operator back into the 8×8 space.
    pub fn embed(&self, m: &CMatrix) -> CMatrix {
        let mut out = CMatrix::zeros(N_LEVELS, N_LEVELS);
        for (i, a) in self.levels.iter().enumerate() {
            for (j, b) in self.levels.iter().enumerate() {
                out[(a.index(), b.index())] = m[(i, j)];
            }
        }
        out
    }
}

/// Superoperator on row-major vectorised ρ (index a·m + b for ρ_ab).
pub fn electronic_liouvillian(model: &StructuredModel, space: &ActiveSpace) -> CMatrix {
    let m = space.len();
    let h = space.restrict(&model.electronic_hamiltonian());
    let mut l = CMatrix::zeros(m * m, m * m);
    let mi = C64::new(0.0, -1.0);
    for a in 0..m {
        for b in 0..m {
            let row = a * m + b;
            for c in 0..m {
                l[(row, c * m + b)] += mi * h[(a, c)];
                l[(row, a * m + c)] -= mi * h[(c, b)];
            }
        }
    }
    for d in &model.decays {
        let (Some(e), Some(g)) = (space.position(d.excited), space.position(d.ground)) else { continue };
        l[(g * m + g, e * m + e)] += d.rate;
        for x in 0..m {
            l[(e * m + x, e * m + x)] -= 0.5 * d.rate;
            l[(x * m + e, x * m + e)] -= 0.5 * d.rate;
        }
    }
    l
}

fn vec_of(rho: &CMatrix) -> CVector {
    let m = rho.nrows();
    CVector::from_fn(m * m, |k, _| rho[(k / m, k % m)])
}

fn mat_of(v: &CVector, m: usize) -> CMatrix {
    CMatrix::from_fn(m, m, |a, b| v[a * m + b])
}

/// Stationary state on the active space with its Liouvillian.
#[derive(Debug, Clone)]
pub struct ElectronicSteadyState {
    pub space: ActiveSpace,
    pub liouvillian: CMatrix,
    /// ρ_ss restricted to the active levels.
    pub rho_active: CMatrix,
    /// ρ_ss on all eight levels.
    pub rho: CMatrix,
    pub residual: f64,
}

const NULL_GAP: f64 = 1e-11;

pub fn steady_state_model(model: &StructuredModel) -> Result<ElectronicSteadyState> {
    let space = ActiveSpace::new(model);
    if space.is_empty() {
        return Err(Error::DegenerateSteadyState { dimension: N_LEVELS });
    }
    let m = space.len();
    let l = electronic_liouvillian(model, &space);
    let scale = l.iter().fold(0.0f64, |acc, z| acc.max(z.norm())).max(1e-300);

    let mut sv: Vec<f64> = l.clone().singular_values().iter().copied().collect();
    sv.sort_by(|a, b| a.partial_cmp(b).unwrap_or(core::cmp::Ordering::Equal));
    let nullity = sv.iter().filter(|&&s| s <= NULL_GAP * scale).count();
    if nullity > 1 {
        return Err(Error::DegenerateSteadyState { dimension: nullity });
    }

    // Replace the first row by the trace condition.
    let mut a = l.clone() / C64::new(scale, 0.0);
    for col in 0..m * m {
        a[(0, col)] = C64::new(0.0, 0.0);
    }
    for k in 0..m {
        a[(0, k * m + k)] = C64::new(1.0, 0.0);
    }
    let mut rhs = CVector::zeros(m * m);
    rhs[0] = C64::new(1.0, 0.0);
    let x = solve(a, &rhs, 1e14, "electronic steady state")?;
    let mut rho = mat_of(&x, m);
    let herm = (rho.clone() + rho.adjoint()) * C64::new(0.5, 0.0);
    rho = herm;
    let residual = (&l * vec_of(&rho)).iter().fold(0.0f64, |acc, z| acc.max(z.norm())) / scale;
    Ok(ElectronicSteadyState { rho: space.embed(&rho), rho_active: rho, space, liouvillian: l, residual })
}

/// ρ_ss for the scheme with every recoil factor set to one.
pub fn steady_state_electronic(scheme: &CoolingScheme) -> Result<CMatrix> {
    Ok(steady_state_model(&StructuredModel::new(scheme)?)?.rho)
}

/// S(ω) = ∫₀^∞ e^{iωt} ⟨δA(0) δA(t)⟩ dt for an 8×8 Hermitian operator A,
/// δA = A − ⟨A⟩, by one linear solve against the deflated Liouvillian.
pub fn correlation_spectrum(ss: &ElectronicSteadyState, op: &CMatrix, omega: f64) -> Result<C64> {
    let m = ss.space.len();
    let mut a = ss.space.restrict(op);
    let mean = (&ss.rho_active * &a).trace();
    for k in 0..m {
        a[(k, k)] -= mean;
    }
    let x = vec_of(&(&ss.rho_active * &a));
    let mut k = -ss.liouvillian.clone();
    for i in 0..m * m {
        k[(i, i)] -= C64::new(0.0, omega);
    }
    // Rank-one deflation |ρ_ss⟩⟩⟨⟨1| removes the stationary zero mode.
    let scale = ss.liouvillian.iter().fold(0.0f64, |acc, z| acc.max(z.norm())).max(omega.abs()).max(1e-300);
    let rv = vec_of(&ss.rho_active);
    for i in 0..m * m {
        for j in 0..m {
            k[(i, j * m + j)] += rv[i] * scale;
        }
    }
    let y = solve(k, &x, 1e13, &format!("correlation spectrum at omega = {omega:e}"))?;
    Ok((&a * mat_of(&y, m)).trace())
}
