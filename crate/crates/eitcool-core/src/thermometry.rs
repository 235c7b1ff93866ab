//! Sideband thermometry on simulated data: red/blue sideband readout,
//! n̄ extraction, exponential cooling fits with the t_cut rule, and the rate
//! at n̄ = 1.
//!
//! The readout is ideal: first-order sideband Rabi frequencies, no carrier
//! excitation, no decoherence.

use alloc::format;
use alloc::vec::Vec;

use crate::lindblad::Trajectory;
use crate::model::FockDistribution;
use crate::{error::invalid, Error, Result};

#[allow(unused_imports)]
use num_traits::Float;

/// |n_∞ − fit(t)| at which the transient counts as over.
pub const T_CUT_THRESHOLD: f64 = 0.005;

/// Red (−1) or blue (+1) sideband.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Sideband {
    Red,
    Blue,
}

impl Sideband {
    pub fn from_order(order: i32) -> Result<Self> {
        match order {
            -1 => Ok(Sideband::Red),
            1 => Ok(Sideband::Blue),
            o => Err(invalid(format!("sideband order must be +1 or -1, got {o}"))),
        }
    }
}

/// Sideband excitation probabilities recorded against cooling time.
#[derive(Debug, Clone, PartialEq)]
pub struct SidebandSeries {
    pub times: Vec<f64>,
    pub rsb: Vec<f64>,
    pub bsb: Vec<f64>,
    pub rabi_time: f64,
    pub sideband_eta: f64,
}

/// P = Σ p_n sin²(Ω_{n,n±1} t_R / 2) with Ω_{n,n−1} = η√n Ω (red) and
/// Ω_{n,n+1} = η√(n+1) Ω (blue).
pub fn sideband_excitation(dist: &FockDistribution, eta_sb: f64, omega_sb: f64, t_r: f64, order: i32) -> Result<f64> {
    let side = Sideband::from_order(order)?;
    let total = dist.total();
    if (total - 1.0).abs() > 1e-6 {
        return Err(invalid(format!("distribution not normalised (sum = {total})")));
    }
    let mut p = 0.0;
    for (n, pn) in dist.populations.iter().enumerate() {
        let k = match side {
            Sideband::Red => n as f64,
            Sideband::Blue => (n + 1) as f64,
        };
        let s = (0.5 * eta_sb * k.sqrt() * omega_sb * t_r).sin();
        p += pn * s * s;
    }
    Ok(p)
}

/// Default readout time π/(η Ω √(n̄₀+1)), the π-time of the blue sideband
/// at the initial occupation.
pub fn default_rabi_time(eta_sb: f64, omega_sb: f64, nbar0: f64) -> f64 {
    core::f64::consts::PI / (eta_sb * omega_sb * (nbar0 + 1.0).sqrt())
}

/// n̄ = RSB/(BSB − RSB).
pub fn nbar_from_sidebands(rsb: f64, bsb: f64) -> Result<f64> {
    if !(rsb >= 0.0) || !(bsb > rsb) {
        return Err(invalid(format!("need bsb > rsb >= 0, got rsb = {rsb}, bsb = {bsb}")));
    }
    Ok(rsb / (bsb - rsb))
}

/// Direct pipeline: n̄ at every recorded time.
pub fn nbar_series(series: &SidebandSeries) -> Result<Vec<f64>> {
    series.rsb.iter().zip(&series.bsb).map(|(&r, &b)| nbar_from_sidebands(r, b)).collect()
}

/// Hot-regime pipeline: fit RSB(t) and BSB(t) individually with
/// exponentials and form n̄ from the fitted curves.
pub fn nbar_series_from_sideband_fits(series: &SidebandSeries) -> Result<Vec<f64>> {
    let fr = fit_exponential(&series.times, &series.rsb)?;
    let fb = fit_exponential(&series.times, &series.bsb)?;
    series.times.iter().map(|&t| nbar_from_sidebands(fr.eval(t), fb.eval(t))).collect()
}

/// A·e^{−Rt} + n_∞ fit plus the steady-state average after t_cut.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FitResult {
    pub amplitude: f64,
    pub rate: f64,
    pub n_infinity: f64,
    /// Time at which |A|e^{−Rt} first drops to 0.005.
    pub t_cut: f64,
    /// Mean of the data after t_cut; `None` when no point lies beyond it.
    pub n_ss: Option<f64>,
    pub rms_residual: f64,
    pub iterations: usize,
}

impl FitResult {
    pub fn eval(&self, t: f64) -> f64 {
        self.amplitude * (-self.rate * t).exp() + self.n_infinity
    }
}

/// Levenberg–Marquardt fit of A e^{−Rt} + c. Times are normalised by the
/// largest time before fitting, which makes the result scale-equivariant.
pub fn fit_exponential(times: &[f64], values: &[f64]) -> Result<FitResult> {
    if times.len() != values.len() {
        return Err(invalid("times and values differ in length"));
    }
    if times.len() < 5 {
        return Err(Error::NoData(format!("need at least 5 points, got {}", times.len())));
    }
    if times.iter().chain(values).any(|v| !v.is_finite()) {
        return Err(invalid("non-finite data"));
    }
    let tmax = times.iter().fold(0.0f64, |m, t| m.max(t.abs()));
    if tmax == 0.0 {
        return Err(invalid("all times are zero"));
    }
    let x: Vec<f64> = times.iter().map(|t| t / tmax).collect();
    let y = values;

    // Start: c from the last points, R from a log-linear fit of |y − c|.
    let m = y.len();
    let tail = (m / 10).max(1);
    let c0 = y[m - tail..].iter().sum::<f64>() / tail as f64;
    let a0 = y[0] - c0;
    let (mut sx, mut sy, mut sxx, mut sxy, mut k) = (0.0, 0.0, 0.0, 0.0, 0.0);
    for i in 0..m - tail {
        let r = (y[i] - c0) * a0.signum();
        if r > 1e-12 * a0.abs() {
            let l = r.ln();
            sx += x[i];
            sy += l;
            sxx += x[i] * x[i];
            sxy += x[i] * l;
            k += 1.0;
        }
    }
    let slope = if k >= 2.0 { (k * sxy - sx * sy) / (k * sxx - sx * sx) } else { -1.0 };
    let mut p = [a0, (-slope).max(1e-3), c0];

    let resid = |p: &[f64; 3]| -> f64 {
        x.iter().zip(y).map(|(xi, yi)| (p[0] * (-p[1] * xi).exp() + p[2] - yi).powi(2)).sum()
    };
    let mut cost = resid(&p);
    let mut lambda = 1e-3;
    let mut iterations = 0;
    let scale = y.iter().fold(0.0f64, |s, v| s.max(v.abs())).max(1e-300);
    for it in 0..500 {
        iterations = it + 1;
        let mut jtj = [[0.0; 3]; 3];
        let mut jtr = [0.0; 3];
        for (xi, yi) in x.iter().zip(y) {
            let e = (-p[1] * xi).exp();
            let j = [e, -p[0] * xi * e, 1.0];
            let r = p[0] * e + p[2] - yi;
            for a in 0..3 {
                jtr[a] += j[a] * r;
                for b in 0..3 {
                    jtj[a][b] += j[a] * j[b];
                }
            }
        }
        let mut improved = false;
        for _ in 0..40 {
            let mut a = jtj;
            for d in 0..3 {
                a[d][d] *= 1.0 + lambda;
                a[d][d] += 1e-300;
            }
            let Some(step) = solve3(a, [-jtr[0], -jtr[1], -jtr[2]]) else {
                lambda *= 10.0;
                continue;
            };
            let trial = [p[0] + step[0], p[1] + step[1], p[2] + step[2]];
            let c = resid(&trial);
            if c.is_finite() && c <= cost {
                let small = step.iter().zip(&trial).all(|(s, v)| s.abs() <= 1e-15 * v.abs().max(1e-300))
                    || (cost - c) <= 1e-30 * scale * scale;
                p = trial;
                cost = c;
                lambda = (lambda * 0.1).max(1e-15);
                improved = true;
                if small {
                    return finish(p, cost, iterations, times, values, tmax);
                }
                break;
            }
            lambda *= 10.0;
        }
        if !improved {
            break;
        }
    }
    let rms = (cost / m as f64).sqrt();
    if !(p[1] > 0.0) || !p.iter().all(|v| v.is_finite()) {
        return Err(Error::Fit(format!("fit did not converge (rms residual {rms:e}, R = {:e})", p[1] / tmax)));
    }
    finish(p, cost, iterations, times, values, tmax)
}

fn finish(p: [f64; 3], cost: f64, iterations: usize, times: &[f64], values: &[f64], tmax: f64) -> Result<FitResult> {
    let rate = p[1] / tmax;
    if !(rate > 0.0) {
        return Err(Error::Fit(format!("fitted rate {rate:e} is not positive")));
    }
    let t_cut = if p[0].abs() <= T_CUT_THRESHOLD { 0.0 } else { (p[0].abs() / T_CUT_THRESHOLD).ln() / rate };
    let tail: Vec<f64> = times.iter().zip(values).filter(|(t, _)| **t > t_cut).map(|(_, v)| *v).collect();
    let n_ss = (!tail.is_empty()).then(|| tail.iter().sum::<f64>() / tail.len() as f64);
    Ok(FitResult {
        amplitude: p[0],
        rate,
        n_infinity: p[2],
        t_cut,
        n_ss,
        rms_residual: (cost / values.len() as f64).sqrt(),
        iterations,
    })
}

fn solve3(mut a: [[f64; 3]; 3], mut b: [f64; 3]) -> Option<[f64; 3]> {
    for c in 0..3 {
        let piv = (c..3).max_by(|&i, &j| a[i][c].abs().partial_cmp(&a[j][c].abs()).unwrap_or(core::cmp::Ordering::Equal))?;
        if a[piv][c].abs() < 1e-300 {
            return None;
        }
        a.swap(c, piv);
        b.swap(c, piv);
        for r in c + 1..3 {
            let f = a[r][c] / a[c][c];
            for k in c..3 {
                a[r][k] -= f * a[c][k];
            }
            b[r] -= f * b[c];
        }
    }
    let mut x = [0.0; 3];
    for c in (0..3).rev() {
        let s: f64 = (c + 1..3).map(|k| a[c][k] * x[k]).sum();
        x[c] = (b[c] - s) / a[c][c];
    }
    Some(x)
}

/// Fit of an n̄(t) series: n̄(t) = A e^{−Rt} + n_∞, t_cut, n_ss.
pub fn fit_cooling_curve(times: &[f64], nbar: &[f64]) -> Result<FitResult> {
    fit_exponential(times, nbar)
}

/// Natural cubic spline through (x_i, y_i).
struct Spline {
    x: Vec<f64>,
    y: Vec<f64>,
    m: Vec<f64>,
}

impl Spline {
    fn new(x: &[f64], y: &[f64]) -> Self {
        let n = x.len();
        let mut m = alloc::vec![0.0; n];
        if n > 2 {
            let mut c = alloc::vec![0.0; n];
            let mut d = alloc::vec![0.0; n];
            for i in 1..n - 1 {
                let h0 = x[i] - x[i - 1];
                let h1 = x[i + 1] - x[i];
                let r = 6.0 * ((y[i + 1] - y[i]) / h1 - (y[i] - y[i - 1]) / h0);
                let diag = 2.0 * (h0 + h1) - h0 * c[i - 1];
                c[i] = h1 / diag;
                d[i] = (r - h0 * d[i - 1]) / diag;
            }
            for i in (1..n - 1).rev() {
                m[i] = d[i] - c[i] * m[i + 1];
            }
        }
        Spline { x: x.to_vec(), y: y.to_vec(), m }
    }

    fn eval(&self, t: f64) -> f64 {
        let n = self.x.len();
        let i = match self.x.partition_point(|&v| v <= t) {
            0 => 0,
            k if k >= n => n - 2,
            k => k - 1,
        };
        let h = self.x[i + 1] - self.x[i];
        let a = (self.x[i + 1] - t) / h;
        let b = (t - self.x[i]) / h;
        a * self.y[i]
            + b * self.y[i + 1]
            + ((a * a * a - a) * self.m[i] + (b * b * b - b) * self.m[i + 1]) * h * h / 6.0
    }
}

/// Instantaneous rate −(dn̄/dt)/(n̄ − n_ss) where n̄ first crosses `level`,
/// from a centered 5-point stencil of step `h` on a spline of the data.
pub fn rate_at_level(times: &[f64], nbar: &[f64], n_ss: f64, level: f64, h: Option<f64>) -> Result<f64> {
    if times.len() != nbar.len() || times.len() < 5 {
        return Err(Error::NoData("need at least 5 points".into()));
    }
    let idx = nbar
        .windows(2)
        .position(|w| (w[0] - level) * (w[1] - level) <= 0.0 && w[0] != w[1])
        .ok_or_else(|| Error::NoData(format!("trajectory never crosses nbar = {level}")))?;
    let (t0, t1, y0) = (times[idx], times[idx + 1], nbar[idx]);
    let spline = Spline::new(times, nbar);
    // Refine the crossing on the spline by bisection.
    let (mut lo, mut hi) = (t0, t1);
    let flo = y0 - level;
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        if (spline.eval(mid) - level) * flo > 0.0 {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    let tc = 0.5 * (lo + hi);
    let spacing = t1 - t0;
    let h = h.unwrap_or(0.5 * spacing);
    let first = times[0];
    let last = times[times.len() - 1];
    if tc - 2.0 * h < first || tc + 2.0 * h > last {
        return Err(Error::NoData("crossing too close to the ends of the trajectory for the stencil".into()));
    }
    let f = |t: f64| spline.eval(t);
    let deriv = (f(tc - 2.0 * h) - 8.0 * f(tc - h) + 8.0 * f(tc + h) - f(tc + 2.0 * h)) / (12.0 * h);
    let excess = f(tc) - n_ss;
    if excess.abs() < 1e-300 {
        return Err(Error::NoData("nbar equals n_ss at the crossing".into()));
    }
    Ok(-deriv / excess)
}

/// Rate at n̄ = 1 with n_ss taken from the exponential fit of the whole
/// trajectory (the post-t_cut average, or n_∞ when no point lies beyond).
pub fn rate_at_nbar_one(traj: &Trajectory) -> Result<f64> {
    let fit = fit_cooling_curve(&traj.times, &traj.nbar)?;
    let n_ss = fit.n_ss.unwrap_or(fit.n_infinity);
    rate_at_level(&traj.times, &traj.nbar, n_ss, 1.0, None)
}
