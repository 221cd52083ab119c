//! Adaptive Dormand–Prince 5(4) integrator for complex state vectors.

use num_complex::Complex64 as C64;

use crate::error::{invalid, Error, Result};

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct OdeOptions {
    pub rtol: f64,
    pub atol: f64,
    pub initial_step: f64,
    pub max_step: f64,
    pub min_step: f64,
    pub max_steps: usize,
}

impl Default for OdeOptions {
    fn default() -> Self {
        Self {
            rtol: 1e-8,
            atol: 1e-10,
            initial_step: 1e-2,
            max_step: f64::INFINITY,
            min_step: 1e-12,
            max_steps: 10_000_000,
        }
    }
}

impl OdeOptions {
    pub fn validate(&self) -> Result<()> {
        if !(self.rtol > 0.0 && self.atol > 0.0) {
            return Err(invalid("tolerance", "rtol and atol must be > 0"));
        }
        if !(self.initial_step > 0.0 && self.max_step > 0.0 && self.min_step > 0.0) {
            return Err(invalid("step", "step sizes must be > 0"));
        }
        Ok(())
    }
}

const C: [f64; 7] = [0.0, 0.2, 0.3, 0.8, 8.0 / 9.0, 1.0, 1.0];
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
const E: [f64; 7] =
    [71.0 / 57600.0, 0.0, -71.0 / 16695.0, 71.0 / 1920.0, -17253.0 / 339200.0, 22.0 / 525.0, -1.0 / 40.0];

/// Integrator with a remembered step size, so consecutive calls over
/// adjacent intervals continue smoothly.
#[derive(Clone, Debug)]
pub struct Dopri5 {
    opts: OdeOptions,
    h: f64,
    steps: usize,
    k: Vec<Vec<C64>>,
    tmp: Vec<C64>,
    y_new: Vec<C64>,
}

impl Dopri5 {
    pub fn new(opts: OdeOptions, len: usize) -> Result<Self> {
        opts.validate()?;
        Ok(Self {
            opts,
            h: opts.initial_step.min(opts.max_step),
            steps: 0,
            k: vec![vec![C64::default(); len]; 7],
            tmp: vec![C64::default(); len],
            y_new: vec![C64::default(); len],
        })
    }

    /// Accepted steps so far.
    pub fn steps(&self) -> usize {
        self.steps
    }

    /// Advance `y` from `t0` to `t1` in place.
    #[allow(clippy::needless_range_loop)]
    pub fn integrate<F>(&mut self, mut rhs: F, t0: f64, t1: f64, y: &mut [C64]) -> Result<()>
    where
        F: FnMut(f64, &[C64], &mut [C64]),
    {
        if t1 <= t0 {
            return Ok(());
        }
        let n = y.len();
        let mut t = t0;
        let mut fresh = true;
        while t < t1 {
            if self.steps >= self.opts.max_steps {
                return Err(Error::StepBudget { steps: self.steps, t });
            }
            let mut h = self.h.min(self.opts.max_step);
            let last = t + h >= t1;
            if last {
                h = t1 - t;
            }
            if fresh {
                rhs(t, y, &mut self.k[0]);
                fresh = false;
            }
            for s in 1..7 {
                for i in 0..n {
                    let mut acc = C64::default();
                    for (j, a) in A[s].iter().enumerate().take(s) {
                        if *a != 0.0 {
                            acc += self.k[j][i] * *a;
                        }
                    }
                    self.tmp[i] = y[i] + acc * h;
                }
                let (_, tail) = self.k.split_at_mut(s);
                rhs(t + C[s] * h, &self.tmp, &mut tail[0]);
                if s == 6 {
                    self.y_new.copy_from_slice(&self.tmp);
                }
            }
            let mut err = 0.0;
            for i in 0..n {
                let mut e = C64::default();
                for (j, w) in E.iter().enumerate() {
                    if *w != 0.0 {
                        e += self.k[j][i] * *w;
                    }
                }
                let scale = self.opts.atol + self.opts.rtol * y[i].norm().max(self.y_new[i].norm());
                let r = (e * h).norm() / scale;
                err += r * r;
            }
            let err = (err / n as f64).sqrt();
            if !err.is_finite() {
                return Err(Error::Numerical(format!("non-finite error estimate at t = {t}")));
            }
            let factor = if err == 0.0 { 5.0 } else { (0.9 * err.powf(-0.2)).clamp(0.2, 5.0) };
            if err <= 1.0 {
                t = if last { t1 } else { t + h };
                y.copy_from_slice(&self.y_new);
                // first-same-as-last: stage 7 is the derivative at the new point
                let (first, rest) = self.k.split_at_mut(1);
                first[0].copy_from_slice(&rest[5]);
                self.steps += 1;
                if !last || factor < 1.0 {
                    self.h = h * factor;
                }
            } else {
                self.h = h * factor.min(1.0);
                if self.h < self.opts.min_step {
                    return Err(Error::StepUnderflow { t });
                }
            }
        }
        Ok(())
    }
}
