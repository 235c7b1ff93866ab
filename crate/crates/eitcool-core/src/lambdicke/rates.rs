use alloc::format;
use alloc::vec;
use alloc::vec::Vec;

use nalgebra::{DMatrix, DVector, SymmetricEigen};

use super::numeric_spectrum_grid;
use crate::lindblad::steady_state_model;
use crate::model::{CoolingScheme, FockDistribution, Level, StructuredModel, TruncationWarning};
use crate::units::{HBAR, K_B};
use crate::{error::invalid, Error, Result};

#[allow(unused_imports)]
use num_traits::Float;

/// Default Fock cutoff for rate-equation work.
pub const RATE_EQ_NMAX: usize = 60;

/// One scattering channel e → g for the carrier diffusion term.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DiffusionChannel {
    pub excited: Level,
    /// Effective emission Lamb-Dicke factor η̃_eg.
    pub effective_eta: f64,
    /// Scattering rate γ_eg in 1/s.
    pub rate: f64,
}

/// D = Σ_e p_e Σ_g η̃²_eg γ_eg. `excited_populations` pairs each excited
/// level with its population.
pub fn diffusion_coefficient(excited_populations: &[(Level, f64)], channels: &[DiffusionChannel]) -> Result<f64> {
    for &(l, p) in excited_populations {
        if !(0.0..=1.0).contains(&p) {
            return Err(invalid(format!("population of {} must lie in [0,1], got {p}", l.name())));
        }
    }
    let mut d = 0.0;
    for c in channels {
        if !(c.effective_eta >= 0.0 && c.rate >= 0.0) {
            return Err(invalid("diffusion channels need nonnegative eta and rate"));
        }
        let p: f64 = excited_populations.iter().filter(|(l, _)| *l == c.excited).map(|(_, p)| p).sum();
        d += p * c.effective_eta * c.effective_eta * c.rate;
    }
    Ok(d)
}

/// Carrier diffusion of a scheme from its electronic steady state, with one
/// effective emission Lamb-Dicke factor for every decay dipole.
pub fn scheme_diffusion(scheme: &CoolingScheme, emission_eta: f64) -> Result<f64> {
    if emission_eta == 0.0 {
        return Ok(0.0);
    }
    let model = StructuredModel::new(scheme)?;
    let rho = steady_state_model(&model)?.rho;
    let pops: Vec<(Level, f64)> =
        [Level::PMinus, Level::PPlus].iter().map(|&l| (l, rho[(l.index(), l.index())].re.clamp(0.0, 1.0))).collect();
    let channels: Vec<DiffusionChannel> = model
        .decays
        .iter()
        .map(|d| DiffusionChannel { excited: d.excited, effective_eta: emission_eta, rate: d.rate })
        .collect();
    diffusion_coefficient(&pops, &channels)
}

/// A₊ = 2Re[S(+ν) + D] (heating), A₋ = 2Re[S(−ν) + D] (cooling). With the
/// transform convention used here the bright resonance sits at negative ω,
/// so the cooling rate samples S at −ν.
pub fn heating_cooling_rates<F>(mut re_s: F, diffusion: f64, nu: f64) -> Result<(f64, f64)>
where
    F: FnMut(f64) -> Result<f64>,
{
    if !(nu > 0.0) {
        return Err(invalid("trap frequency must be > 0"));
    }
    let sp = re_s(nu)?;
    let sm = re_s(-nu)?;
    let a_plus = 2.0 * (sp + diffusion);
    let a_minus = 2.0 * (sm + diffusion);
    let tol = 1e-9 * a_plus.abs().max(a_minus.abs()).max(f64::MIN_POSITIVE);
    if a_plus < -tol || a_minus < -tol {
        return Err(invalid(format!("negative rate (A+ = {a_plus:e}, A- = {a_minus:e}): spectrum misused")));
    }
    Ok((a_plus.max(0.0), a_minus.max(0.0)))
}

/// Rates and steady-state quantities of the Lamb-Dicke rate equation.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RateModel {
    pub diffusion: f64,
    pub a_plus: f64,
    pub a_minus: f64,
    pub cooling_rate: f64,
    /// A₊/(A₋ − A₊); infinite when there is no net cooling.
    pub n_ss: f64,
    pub p0_ss: f64,
    /// ħν/(k_B ln(A₋/A₊)) in kelvin.
    pub t_ss_temperature: f64,
    pub nu: f64,
}

impl RateModel {
    pub fn new(a_plus: f64, a_minus: f64, diffusion: f64, nu: f64) -> Result<Self> {
        if !(a_plus >= 0.0 && a_minus >= 0.0) {
            return Err(invalid("rates must be >= 0"));
        }
        let r = a_minus - a_plus;
        let (n_ss, p0_ss, t) = if r > 0.0 {
            let t = if a_plus > 0.0 { HBAR * nu / (K_B * (a_minus / a_plus).ln()) } else { 0.0 };
            (a_plus / r, r / a_minus, t)
        } else {
            (f64::INFINITY, 0.0, f64::INFINITY)
        };
        Ok(RateModel { diffusion, a_plus, a_minus, cooling_rate: r, n_ss, p0_ss, t_ss_temperature: t, nu })
    }

    /// Lamb-Dicke rates of a scheme on its own mode from the exact
    /// regression-theorem spectrum of the eight-level model.
    pub fn from_scheme(scheme: &CoolingScheme, diffusion: f64) -> Result<Self> {
        let nu = scheme.mode.frequency;
        let s = numeric_spectrum_grid(scheme, &[nu, -nu])?;
        let (ap, am) = heating_cooling_rates(|w| Ok(if w > 0.0 { s[0].re } else { s[1].re }), diffusion, nu)?;
        RateModel::new(ap, am, diffusion, nu)
    }

    pub fn matrix(&self, n_max: usize) -> Result<RateMatrix> {
        RateMatrix::new(self.a_plus, self.a_minus, n_max)
    }

    /// n̄(t) = (n₀ − n_ss)e^{−Rt} + n_ss.
    pub fn nbar_exponential(&self, n0: f64, t: f64) -> f64 {
        (n0 - self.n_ss) * (-self.cooling_rate * t).exp() + self.n_ss
    }
}

/// Above this log-spread of weights the symmetrised eigen-solution is
/// replaced by the Taylor exponential.
const MAX_LOG_SPREAD: f64 = 8.0;

/// Tridiagonal birth-death generator on Fock states 0..=n_max:
/// dp_n/dt = A₋[(n+1)p_{n+1} − n p_n] + A₊[n p_{n−1} − (n+1)p_n].
/// The top state has no upward transition, so every column sums to zero.
#[derive(Debug, Clone, PartialEq)]
pub struct RateMatrix {
    pub a_plus: f64,
    pub a_minus: f64,
    pub diagonal: Vec<f64>,
    /// A_{n+1,n} (heating, n → n+1).
    pub lower: Vec<f64>,
    /// A_{n,n+1} (cooling, n+1 → n).
    pub upper: Vec<f64>,
}

impl RateMatrix {
    pub fn new(a_plus: f64, a_minus: f64, n_max: usize) -> Result<Self> {
        if n_max < 1 {
            return Err(invalid("n_max must be >= 1"));
        }
        if !(a_plus >= 0.0 && a_minus >= 0.0) {
            return Err(invalid("rates must be >= 0"));
        }
        let dim = n_max + 1;
        let lower: Vec<f64> = (0..n_max).map(|n| a_plus * (n + 1) as f64).collect();
        let upper: Vec<f64> = (0..n_max).map(|n| a_minus * (n + 1) as f64).collect();
        let diagonal: Vec<f64> = (0..dim)
            .map(|n| {
                let up = if n < n_max { lower[n] } else { 0.0 };
                -(a_minus * n as f64 + up)
            })
            .collect();
        Ok(RateMatrix { a_plus, a_minus, diagonal, lower, upper })
    }

    pub fn dimension(&self) -> usize {
        self.diagonal.len()
    }

    pub fn to_dense(&self) -> DMatrix<f64> {
        let n = self.dimension();
        let mut m = DMatrix::zeros(n, n);
        for i in 0..n {
            m[(i, i)] = self.diagonal[i];
        }
        for i in 0..n - 1 {
            m[(i + 1, i)] = self.lower[i];
            m[(i, i + 1)] = self.upper[i];
        }
        m
    }

    /// Normalised null vector from a dense solve with one row replaced by
    /// the normalisation condition.
    pub fn null_vector(&self) -> Result<FockDistribution> {
        let n = self.dimension();
        let mut m = self.to_dense();
        for j in 0..n {
            m[(0, j)] = 1.0;
        }
        let mut rhs = DVector::zeros(n);
        rhs[0] = 1.0;
        let x = m.lu().solve(&rhs).ok_or(Error::Singular { condition: f64::INFINITY, context: "rate-matrix null vector".into() })?;
        FockDistribution::new(x.iter().map(|v| v.max(0.0)).collect())
    }

    /// e^{At} p0. Uses the detailed-balance symmetrisation when both rates
    /// are positive and the weights stay well conditioned, and a scaled
    /// Taylor exponential otherwise.
    pub fn evolve(&self, p0: &FockDistribution, t: f64) -> Result<(FockDistribution, Option<TruncationWarning>)> {
        let n = self.dimension();
        if p0.len() != n {
            return Err(invalid(format!("distribution has {} states, matrix has {n}", p0.len())));
        }
        if !(t >= 0.0) {
            return Err(invalid("evolution time must be >= 0"));
        }
        let p = DVector::from_column_slice(&p0.populations);
        let out = if self.a_plus > 0.0 && self.a_minus > 0.0 && self.symmetrisation_spread() <= MAX_LOG_SPREAD {
            self.evolve_symmetric(&p, t)
        } else {
            expm_taylor(&(self.to_dense() * t)) * p
        };
        let dist = FockDistribution { populations: out.iter().copied().collect() };
        let warn = dist.truncation_warning(t).or_else(|| p0.truncation_warning(0.0));
        Ok((dist, warn))
    }

    /// ln of the ratio between the largest and smallest symmetrisation
    /// weights; the eigen-solution loses about this many e-folds of accuracy.
    fn symmetrisation_spread(&self) -> f64 {
        0.5 * (self.a_plus / self.a_minus).ln().abs() * (self.dimension() - 1) as f64
    }

    /// Dense transition matrix e^{A dt}, by the same route choice as
    /// [`RateMatrix::evolve`].
    pub fn transition(&self, dt: f64) -> Result<DMatrix<f64>> {
        if !(dt >= 0.0) {
            return Err(invalid("evolution time must be >= 0"));
        }
        let n = self.dimension();
        if !(self.a_plus > 0.0 && self.a_minus > 0.0 && self.symmetrisation_spread() <= MAX_LOG_SPREAD) {
            return Ok(expm_taylor(&(self.to_dense() * dt)));
        }
        let mut out = DMatrix::zeros(n, n);
        for j in 0..n {
            let mut e = DVector::zeros(n);
            e[j] = 1.0;
            out.set_column(j, &self.evolve_symmetric(&e, dt));
        }
        Ok(out)
    }

    fn evolve_symmetric(&self, p: &DVector<f64>, t: f64) -> DVector<f64> {
        let n = self.dimension();
        // s_n = sqrt(π_n) with π_n ∝ (A₊/A₋)^n; B = S⁻¹AS is symmetric.
        let half_log_q = 0.5 * (self.a_plus / self.a_minus).ln();
        let s: Vec<f64> = (0..n).map(|k| (half_log_q * k as f64).exp()).collect();
        let mut b = DMatrix::zeros(n, n);
        for i in 0..n {
            b[(i, i)] = self.diagonal[i];
        }
        for i in 0..n - 1 {
            let v = (self.lower[i] * self.upper[i]).sqrt();
            b[(i + 1, i)] = v;
            b[(i, i + 1)] = v;
        }
        let eig = SymmetricEigen::new(b);
        let y = DVector::from_fn(n, |i, _| p[i] / s[i]);
        let mut c = eig.eigenvectors.transpose() * y;
        for k in 0..n {
            c[k] *= (eig.eigenvalues[k] * t).exp();
        }
        let z = eig.eigenvectors * c;
        DVector::from_fn(n, |i, _| z[i] * s[i])
    }
}

/// Dense matrix exponential by scaling and squaring with a degree-20 Taylor
/// polynomial.
pub fn expm_taylor(a: &DMatrix<f64>) -> DMatrix<f64> {
    let n = a.nrows();
    let norm = a.iter().fold(0.0f64, |m, v| m.max(v.abs())) * n as f64;
    let mut squarings = 0u32;
    let mut scale = 1.0;
    while norm * scale > 0.5 {
        scale *= 0.5;
        squarings += 1;
    }
    let x = a * scale;
    let mut term = DMatrix::identity(n, n);
    let mut sum = term.clone();
    for k in 1..=20 {
        term = &term * &x / k as f64;
        sum += &term;
    }
    for _ in 0..squarings {
        sum = &sum * &sum;
    }
    sum
}

pub fn rate_matrix(a_plus: f64, a_minus: f64, n_max: usize) -> Result<RateMatrix> {
    RateMatrix::new(a_plus, a_minus, n_max)
}

pub fn evolve_rate_eq(
    p0: &FockDistribution,
    matrix: &RateMatrix,
    t: f64,
) -> Result<(FockDistribution, Option<TruncationWarning>)> {
    matrix.evolve(p0, t)
}

/// n̄ on a time grid from the rate equation, starting thermal.
pub fn rate_eq_nbar(model: &RateModel, n0: f64, n_max: usize, times: &[f64]) -> Result<Vec<f64>> {
    let m = model.matrix(n_max)?;
    let p0 = FockDistribution::thermal(n0, n_max + 1)?;
    let mut out = vec![0.0; times.len()];
    for (o, &t) in out.iter_mut().zip(times) {
        *o = m.evolve(&p0, t)?.0.mean();
    }
    Ok(out)
}
