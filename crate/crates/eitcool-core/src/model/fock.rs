use alloc::format;
use alloc::vec;
use alloc::vec::Vec;

use crate::{error::invalid, Result};

#[allow(unused_imports)]
use num_traits::Float;

/// Vibrational populations p_0..p_{N-1}.
#[derive(Debug, Clone, PartialEq)]
pub struct FockDistribution {
    pub populations: Vec<f64>,
}

/// Population in the highest retained Fock state above which results are
/// flagged as truncation-limited.
pub const TRUNCATION_THRESHOLD: f64 = 1e-3;

/// Emitted when the top Fock state carries more than [`TRUNCATION_THRESHOLD`].
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TruncationWarning {
    pub time: f64,
    pub top_population: f64,
}

impl FockDistribution {
    pub fn new(populations: Vec<f64>) -> Result<Self> {
        if populations.is_empty() {
            return Err(invalid("empty Fock distribution"));
        }
        if populations.iter().any(|p| !(p.is_finite() && *p >= -1e-12)) {
            return Err(invalid("Fock populations must be finite and nonnegative"));
        }
        Ok(FockDistribution { populations })
    }

    /// Thermal distribution with mean `nbar` on `n` states, renormalised
    /// after truncation.
    pub fn thermal(nbar: f64, n: usize) -> Result<Self> {
        if !(nbar >= 0.0) || !nbar.is_finite() {
            return Err(invalid(format!("thermal nbar must be finite and >= 0, got {nbar}")));
        }
        if n == 0 {
            return Err(invalid("need at least one Fock state"));
        }
        let mut p = vec![0.0; n];
        let q = nbar / (1.0 + nbar);
        let mut x = 1.0;
        for v in p.iter_mut() {
            *v = x;
            x *= q;
        }
        let s: f64 = p.iter().sum();
        p.iter_mut().for_each(|v| *v /= s);
        Ok(FockDistribution { populations: p })
    }

    /// Thermal distribution at inverse temperature βħν = `x`.
    pub fn boltzmann(x: f64, n: usize) -> Result<Self> {
        if !(x > 0.0) {
            return Err(invalid("boltzmann factor exponent must be > 0"));
        }
        FockDistribution::thermal(1.0 / x.exp_m1(), n)
    }

    pub fn fock(k: usize, n: usize) -> Result<Self> {
        if k >= n {
            return Err(invalid(format!("Fock state {k} outside {n}-state truncation")));
        }
        let mut p = vec![0.0; n];
        p[k] = 1.0;
        Ok(FockDistribution { populations: p })
    }

    pub fn len(&self) -> usize {
        self.populations.len()
    }

    pub fn is_empty(&self) -> bool {
        self.populations.is_empty()
    }

    pub fn total(&self) -> f64 {
        self.populations.iter().sum()
    }

    pub fn mean(&self) -> f64 {
        self.populations.iter().enumerate().map(|(k, p)| k as f64 * p).sum()
    }

    pub fn top(&self) -> f64 {
        *self.populations.last().unwrap_or(&0.0)
    }

    pub fn truncation_warning(&self, time: f64) -> Option<TruncationWarning> {
        let top = self.top();
        (top > TRUNCATION_THRESHOLD).then_some(TruncationWarning { time, top_population: top })
    }
}
