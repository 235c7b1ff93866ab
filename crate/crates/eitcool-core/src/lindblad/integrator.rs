//! Dormand–Prince 5(4) with first-same-as-last stages. The generator is
//! time independent, so only the stage weights are needed.

use alloc::format;

use super::Generator;
use crate::linalg::CMatrix;
use crate::{Error, Result, C64};

#[allow(unused_imports)]
use num_traits::Float;

const A: [[f64; 6]; 7] = [
    [0.0; 6],
    [0.2, 0.0, 0.0, 0.0, 0.0, 0.0],
    [3.0 / 40.0, 9.0 / 40.0, 0.0, 0.0, 0.0, 0.0],
    [44.0 / 45.0, -56.0 / 15.0, 32.0 / 9.0, 0.0, 0.0, 0.0],
    [19372.0 / 6561.0, -25360.0 / 2187.0, 64448.0 / 6561.0, -212.0 / 729.0, 0.0, 0.0],
    [9017.0 / 3168.0, -355.0 / 33.0, 46732.0 / 5247.0, 49.0 / 176.0, -5103.0 / 18656.0, 0.0],
    [35.0 / 384.0, 0.0, 500.0 / 1113.0, 125.0 / 192.0, -2187.0 / 6784.0, 11.0 / 84.0],
];
/// Fifth-order minus embedded fourth-order weights.
const E: [f64; 7] = [
    71.0 / 57600.0,
    0.0,
    -71.0 / 16695.0,
    71.0 / 1920.0,
    -17253.0 / 339200.0,
    22.0 / 525.0,
    -1.0 / 40.0,
];

/// Step control. `tolerance` bounds the local error per unit of scaled time
/// t/`time_unit`, measured as the largest entry of the error estimate.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct StepControl {
    pub tolerance: f64,
    pub time_unit: f64,
    pub max_steps: usize,
}

impl StepControl {
    pub fn new(tolerance: f64, time_unit: f64) -> Self {
        StepControl { tolerance, time_unit, max_steps: 50_000_000 }
    }
}

/// Integrator state: the current ρ, its derivative and the stage buffers.
pub struct Integrator<'g, G: Generator + ?Sized> {
    gen: &'g G,
    ctl: StepControl,
    k: [CMatrix; 7],
    tmp: CMatrix,
    work: CMatrix,
    h: f64,
    pub steps: usize,
    pub rejected: usize,
    fsal_valid: bool,
}

impl<'g, G: Generator + ?Sized> Integrator<'g, G> {
    pub fn new(gen: &'g G, ctl: StepControl) -> Result<Self> {
        if !(ctl.tolerance > 0.0 && ctl.time_unit > 0.0) {
            return Err(crate::error::invalid("tolerance and time unit must be > 0"));
        }
        let d = gen.dim();
        let z = || CMatrix::zeros(d, d);
        let rate = gen.max_rate().max(1.0 / ctl.time_unit);
        Ok(Integrator {
            gen,
            ctl,
            k: [z(), z(), z(), z(), z(), z(), z()],
            tmp: z(),
            work: z(),
            h: 0.1 / rate,
            steps: 0,
            rejected: 0,
            fsal_valid: false,
        })
    }

    /// Advances `rho` from `t` to `t_end` in place.
    pub fn advance(&mut self, rho: &mut CMatrix, t: &mut f64, t_end: f64) -> Result<()> {
        if !self.fsal_valid {
            self.gen.apply(rho, &mut self.k[0], &mut self.work);
            self.fsal_valid = true;
        }
        let d = self.gen.dim();
        while *t < t_end {
            if self.steps + self.rejected > self.ctl.max_steps {
                return Err(Error::Integration { time: *t, reason: format!("exceeded {} steps", self.ctl.max_steps) });
            }
            let remaining = t_end - *t;
            let last = self.h >= remaining;
            let h = if last { remaining } else { self.h };
            if h <= 1e-14 * t.abs().max(self.ctl.time_unit) {
                return Err(Error::Integration { time: *t, reason: format!("step size underflow (h = {h:e})") });
            }
            for s in 1..7 {
                self.tmp.copy_from(rho);
                for j in 0..s {
                    let a = A[s][j];
                    if a != 0.0 {
                        let w = h * a;
                        for (x, y) in self.tmp.as_mut_slice().iter_mut().zip(self.k[j].as_slice()) {
                            *x += *y * w;
                        }
                    }
                }
                let (_, tail) = self.k.split_at_mut(s);
                self.gen.apply(&self.tmp, &mut tail[0], &mut self.work);
            }
            // tmp now holds the fifth-order solution (stage 7 input).
            let mut err: f64 = 0.0;
            for col in 0..d {
                for row in 0..d {
                    let idx = col * d + row;
                    let mut e = C64::new(0.0, 0.0);
                    for (s, w) in E.iter().enumerate() {
                        if *w != 0.0 {
                            e += self.k[s].as_slice()[idx] * *w;
                        }
                    }
                    err = err.max(e.norm());
                }
            }
            err *= h;
            let h_scaled = h / self.ctl.time_unit;
            let allowed = self.ctl.tolerance * h_scaled;
            if !err.is_finite() {
                self.h = 0.25 * h;
                self.rejected += 1;
                continue;
            }
            let ratio = if err > 0.0 { allowed / err } else { f64::INFINITY };
            let factor = (0.9 * ratio.powf(0.25)).clamp(0.2, 5.0);
            if err <= allowed {
                rho.copy_from(&self.tmp);
                self.k.swap(0, 6);
                *t = if last { t_end } else { *t + h };
                self.steps += 1;
                if !last || factor < 1.0 {
                    self.h = h * factor;
                }
            } else {
                self.h = h * factor.min(1.0);
                self.rejected += 1;
            }
        }
        Ok(())
    }
}
