use alloc::vec::Vec;

use crate::linalg::{displacement, CMatrix};
use crate::model::{CoolingScheme, OperatorSet, StructuredModel, N_LEVELS};
use crate::{Result, C64};

#[allow(unused_imports)]
use num_traits::Float;

/// Right-hand side of the master equation, dρ/dt = 𝓛ρ, on dense d×d
/// density matrices.
pub trait Generator: Sync {
    fn dim(&self) -> usize;
    /// Writes 𝓛ρ into `out`; `work` is scratch space of the same shape.
    fn apply(&self, rho: &CMatrix, out: &mut CMatrix, work: &mut CMatrix);
    /// Fastest rate in the generator, used to pick the first step.
    fn max_rate(&self) -> f64;
}

/// Entries below this are dropped from the displacement blocks.
const BAND_CUTOFF: f64 = 1e-15;

struct CouplingBlock {
    ground: usize,
    excited: usize,
    /// −i·(Ω w/2)·e^{iη(b+b†)} (ground row block), or `None` for η = 0.
    down: Option<CMatrix>,
    /// −i·(Ω w/2)·e^{−iη(b+b†)} (excited row block).
    up: Option<CMatrix>,
    scalar: C64,
}

/// Matrix-free generator built from the structured model. With
/// H_eff = H − (i/2)Σ r_j L_j†L_j and K = −iH_eff ρ the master equation reads
/// dρ/dt = K + K† + Σ r_j L_j ρ L_j†.
pub struct BlockGenerator {
    n: usize,
    /// −i·(H_eff)_pp for every basis state.
    diag: Vec<C64>,
    couplings: Vec<CouplingBlock>,
    jumps: Vec<(usize, usize, f64)>,
    heating: f64,
    max_rate: f64,
}

impl BlockGenerator {
    pub fn new(scheme: &CoolingScheme, fock_dim: usize) -> Result<Self> {
        let model = StructuredModel::new(scheme)?;
        Self::from_model(&model, fock_dim)
    }

    pub fn from_model(model: &StructuredModel, fock_dim: usize) -> Result<Self> {
        if fock_dim < 2 {
            return Err(crate::error::invalid("fock_dim must be >= 2"));
        }
        let n = fock_dim;
        let mut loss = [0.0; N_LEVELS];
        for d in &model.decays {
            loss[d.excited.index()] += d.rate;
        }
        let r = model.heating;
        let mut diag = Vec::with_capacity(N_LEVELS * n);
        let mut max_rate: f64 = 0.0;
        for a in 0..N_LEVELS {
            for k in 0..n {
                let kf = k as f64;
                let up = if k + 1 < n { kf + 1.0 } else { 0.0 };
                let damp = 0.5 * loss[a] + 0.5 * r * (kf + up);
                let e = model.energies[a] + model.nu * kf;
                diag.push(C64::new(-damp, -e));
                max_rate = max_rate.max(e.abs()).max(damp);
            }
        }
        let mut couplings = Vec::new();
        for c in &model.couplings {
            max_rate = max_rate.max(c.amplitude.abs());
            let scalar = C64::new(0.0, -c.amplitude);
            let (down, up) = if c.eta == 0.0 {
                (None, None)
            } else {
                let mut d = displacement(c.eta, n) * scalar;
                for z in d.iter_mut() {
                    if z.norm() < BAND_CUTOFF * c.amplitude.abs() {
                        *z = C64::new(0.0, 0.0);
                    }
                }
                // −i·amp·D† for the excited rows.
                let u = d.adjoint() * C64::new(-1.0, 0.0);
                (Some(d), Some(u))
            };
            couplings.push(CouplingBlock { ground: c.ground.index(), excited: c.excited.index(), down, up, scalar });
        }
        let jumps = model.decays.iter().map(|d| (d.ground.index(), d.excited.index(), d.rate)).collect();
        Ok(BlockGenerator { n, diag, couplings, jumps, heating: r, max_rate })
    }
}

impl Generator for BlockGenerator {
    fn dim(&self) -> usize {
        N_LEVELS * self.n
    }

    fn max_rate(&self) -> f64 {
        self.max_rate
    }

    fn apply(&self, rho: &CMatrix, out: &mut CMatrix, k: &mut CMatrix) {
        let n = self.n;
        let d = self.dim();
        // K = −i H_eff ρ.
        for col in 0..d {
            let src = rho.column(col);
            let mut dst = k.column_mut(col);
            for p in 0..d {
                dst[p] = self.diag[p] * src[p];
            }
        }
        for c in &self.couplings {
            let (g, e) = (c.ground * n, c.excited * n);
            match (&c.down, &c.up) {
                (Some(down), Some(up)) => {
                    k.rows_mut(g, n).gemm(C64::new(1.0, 0.0), down, &rho.rows(e, n), C64::new(1.0, 0.0));
                    k.rows_mut(e, n).gemm(C64::new(1.0, 0.0), up, &rho.rows(g, n), C64::new(1.0, 0.0));
                }
                _ => {
                    for col in 0..d {
                        for i in 0..n {
                            let re = rho[(e + i, col)];
                            let rg = rho[(g + i, col)];
                            k[(g + i, col)] += c.scalar * re;
                            k[(e + i, col)] += c.scalar * rg;
                        }
                    }
                }
            }
        }
        // out = K + K†.
        for col in 0..d {
            for row in 0..d {
                out[(row, col)] = k[(row, col)] + k[(col, row)].conj();
            }
        }
        for &(g, e, rate) in &self.jumps {
            for j in 0..n {
                for i in 0..n {
                    out[(g * n + i, g * n + j)] += rho[(e * n + i, e * n + j)] * rate;
                }
            }
        }
        let r = self.heating;
        if r > 0.0 {
            for bc in 0..N_LEVELS {
                for ar in 0..N_LEVELS {
                    for j in 0..n {
                        for i in 0..n {
                            let mut acc = C64::new(0.0, 0.0);
                            if i + 1 < n && j + 1 < n {
                                let s = ((i + 1) as f64 * (j + 1) as f64).sqrt();
                                acc += rho[(ar * n + i + 1, bc * n + j + 1)] * s;
                            }
                            if i > 0 && j > 0 {
                                let s = (i as f64 * j as f64).sqrt();
                                acc += rho[(ar * n + i - 1, bc * n + j - 1)] * s;
                            }
                            out[(ar * n + i, bc * n + j)] += acc * r;
                        }
                    }
                }
            }
        }
    }
}

/// Generator from dense operators: H_eff is a dense matrix and each jump
/// operator is applied through its nonzero entries.
pub struct DenseGenerator {
    minus_i_heff: CMatrix,
    jumps: Vec<(f64, Vec<(usize, usize, C64)>)>,
    max_rate: f64,
}

impl DenseGenerator {
    pub fn new(ops: &OperatorSet) -> Self {
        let d = ops.dim();
        let mut heff = ops.hamiltonian.clone();
        let mut jumps = Vec::new();
        for c in &ops.collapse_ops {
            let ldl = c.operator.adjoint() * &c.operator;
            heff -= ldl * C64::new(0.0, 0.5 * c.rate);
            let mut nz = Vec::new();
            for col in 0..d {
                for row in 0..d {
                    let v = c.operator[(row, col)];
                    if v != C64::new(0.0, 0.0) {
                        nz.push((row, col, v));
                    }
                }
            }
            jumps.push((c.rate, nz));
        }
        let max_rate = heff.iter().fold(0.0f64, |m, z| m.max(z.norm()));
        DenseGenerator { minus_i_heff: heff * C64::new(0.0, -1.0), jumps, max_rate }
    }
}

impl Generator for DenseGenerator {
    fn dim(&self) -> usize {
        self.minus_i_heff.nrows()
    }

    fn max_rate(&self) -> f64 {
        self.max_rate
    }

    fn apply(&self, rho: &CMatrix, out: &mut CMatrix, k: &mut CMatrix) {
        let d = self.dim();
        k.gemm(C64::new(1.0, 0.0), &self.minus_i_heff, rho, C64::new(0.0, 0.0));
        for col in 0..d {
            for row in 0..d {
                out[(row, col)] = k[(row, col)] + k[(col, row)].conj();
            }
        }
        for (rate, nz) in &self.jumps {
            for &(p, r, lpr) in nz {
                for &(q, s, lqs) in nz {
                    out[(p, q)] += lpr * rho[(r, s)] * lqs.conj() * *rate;
                }
            }
        }
    }
}
