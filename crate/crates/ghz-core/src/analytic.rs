//! Closed-form drive parameters and preparation-time estimates.
//!
//! Everything here is in units of `g` (so `g = 1` unless passed explicitly)
//! and `log` is the natural logarithm.

use serde::Serialize;

use crate::drive::{x_tone_count, DriveSchedule};
use crate::error::{invalid, Result};
use crate::lambert::{w0, w_minus1};
use crate::params::SystemParams;

/// `x` capped at 1.
pub fn ceil1(x: f64) -> f64 {
    if x > 1.0 {
        1.0
    } else {
        x
    }
}

fn check_n(n: usize) -> Result<()> {
    if n < 2 {
        return Err(invalid("n_qubits", format!("need N >= 2, got {n}")));
    }
    Ok(())
}

fn check_error(e: f64) -> Result<()> {
    if !(e > 0.0 && e < 1.0) {
        return Err(invalid("error", format!("must lie in (0, 1), got {e}")));
    }
    Ok(())
}

/// `H = Σ 1/(F A_F²)` and `G = Σ F A_F²/(N−F)²` for `A_F`, `F = 1..N−1`.
pub fn hg_functions(a: &[f64]) -> Result<(f64, f64)> {
    if a.is_empty() {
        return Err(invalid("amplitudes", "need at least one tone"));
    }
    let n = a.len() + 1;
    let mut h = 0.0;
    let mut g = 0.0;
    for (i, &af) in a.iter().enumerate() {
        if !(af > 0.0) {
            return Err(invalid("amplitudes", format!("A_{} = {af} makes H diverge", i + 1)));
        }
        let f = (i + 1) as f64;
        h += 1.0 / (f * af * af);
        g += f * af * af / ((n - i - 1) as f64).powi(2);
    }
    Ok((h, g))
}

/// Optimal relative Z amplitudes `A_F = √⌈η(N−F)/F⌉¹`.
pub fn z_amplitudes(n: usize, eta: f64) -> Vec<f64> {
    (1..n).map(|f| ceil1(eta * (n - f) as f64 / f as f64).sqrt()).collect()
}

/// `A_X² = 2/(3N log N)`, which matches the X depumping to the Z pumping.
pub fn x_amplitude(n: usize) -> f64 {
    let nf = n as f64;
    (2.0 / (3.0 * nf * nf.ln())).sqrt()
}

/// `(1 + 5/(9 log²N))`, the X share of the loss rate.
pub fn loss_correction(n: usize) -> f64 {
    let l = (n as f64).ln();
    1.0 + 5.0 / (9.0 * l * l)
}

/// `(1 + 1/(3 log N))`, from the compartment steady state.
pub fn compartment_correction(n: usize) -> f64 {
    1.0 + 1.0 / (3.0 * (n as f64).ln())
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct WeakDriveParams {
    pub n_qubits: usize,
    /// Relative Z amplitudes for `F = 1..N−1`.
    pub a_z: Vec<f64>,
    /// Common relative amplitude of the odd X tones.
    pub a_x: f64,
    /// Excited-level linewidth for Z pumping.
    pub gamma: f64,
    /// Excited-level linewidth for X pumping.
    pub gamma_f: f64,
    /// `Ω/γ`.
    pub alpha: f64,
    pub eta: f64,
    /// Stationary error the linewidth was tuned for.
    pub error: f64,
}

/// Linewidth giving stationary error `e` in the 4-compartment estimate.
pub fn weak_gamma(n: usize, e: f64, g: f64) -> f64 {
    let l = (n as f64).ln();
    let inv = 27.0 * n as f64 * l * l / 16.0 * loss_correction(n) * compartment_correction(n);
    g * e.sqrt() / inv.sqrt()
}

pub fn weak_drive_params(n: usize, e: f64, alpha: f64) -> Result<WeakDriveParams> {
    check_n(n)?;
    check_error(e)?;
    if !(alpha > 0.0 && alpha.is_finite()) {
        return Err(invalid("alpha", format!("must be > 0, got {alpha}")));
    }
    let gamma = weak_gamma(n, e, 1.0);
    Ok(WeakDriveParams {
        n_qubits: n,
        a_z: z_amplitudes(n, 2.0),
        a_x: x_amplitude(n),
        gamma,
        gamma_f: gamma,
        alpha,
        eta: 2.0,
        error: e,
    })
}

impl WeakDriveParams {
    pub fn omega(&self) -> f64 {
        self.alpha * self.gamma
    }

    /// Same amplitudes with both linewidths replaced, keeping `Ω = αγ`.
    pub fn with_gamma(mut self, gamma: f64) -> Self {
        self.gamma = gamma;
        self.gamma_f = gamma;
        self
    }

    pub fn schedule(&self) -> Result<DriveSchedule> {
        let om = self.omega();
        DriveSchedule::new(
            self.n_qubits,
            1.0,
            self.a_z.iter().map(|a| a * om).collect(),
            vec![self.a_x * om; x_tone_count(self.n_qubits)],
        )
    }

    /// Symmetric branching, no oscillator loss.
    pub fn system_params(&self) -> Result<SystemParams> {
        SystemParams::symmetric(self.n_qubits, self.gamma, self.gamma_f)
    }
}

/// `f(N) = 2/(3 + 9 log N)`: pumping rate in units of `Ω²/γ`.
pub fn rate_shape(n: usize) -> f64 {
    2.0 / (3.0 + 9.0 * (n as f64).ln())
}

/// `h(N) = (3N log N/8)(1 + 5/(9 log²N))`: loss rate in units of `γΩ²/g²`.
pub fn loss_shape(n: usize) -> f64 {
    let nf = n as f64;
    3.0 * nf * nf.ln() / 8.0 * loss_correction(n)
}

/// Rescaled time `−log(E − c²)/c` to reach error `e`.
pub fn rescaled_time(c: f64, e: f64) -> f64 {
    -(e - c * c).ln() / c
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct DynamicalSolution {
    /// Target (dynamical) error.
    pub target_error: f64,
    /// `W₋₁(−2E/e²)`.
    pub w: f64,
    pub c: f64,
    pub tau: f64,
    pub gamma: f64,
    pub time: f64,
    /// `√(1 + 2/W)`.
    pub gamma_factor: f64,
    /// `√(W² + 2W)`.
    pub time_factor: f64,
    /// Stationary over dynamical error, `1 + 2/W`.
    pub stationary_ratio: f64,
    pub stationary_error: f64,
}

/// Time-optimal linewidth for reaching `e` under the exponential ansatz,
/// with general rate shapes `f`, `h`.
pub fn dynamical_optimum_with(e: f64, alpha: f64, kappa: f64, f: f64, h: f64, g: f64) -> Result<DynamicalSolution> {
    check_error(e)?;
    if !(alpha > 0.0 && kappa > 0.0 && f > 0.0 && h > 0.0 && g > 0.0) {
        return Err(invalid("dynamical problem", "alpha, kappa, f, h, g must be > 0"));
    }
    let w = w_minus1(-2.0 * e / std::f64::consts::E.powi(2))?;
    let ratio = 1.0 + 2.0 / w;
    let c = e.sqrt() * ratio.sqrt();
    let time_factor = (w * w + 2.0 * w).sqrt();
    let tau = time_factor / e.sqrt();
    Ok(DynamicalSolution {
        target_error: e,
        w,
        c,
        tau,
        gamma: g * c * (f / h).sqrt(),
        time: tau / (g * kappa * alpha * alpha) * h.sqrt() / f.powf(1.5),
        gamma_factor: ratio.sqrt(),
        time_factor,
        stationary_ratio: ratio,
        stationary_error: e * ratio,
    })
}

pub fn dynamical_optimum(n: usize, e: f64, alpha: f64, kappa: f64) -> Result<DynamicalSolution> {
    check_n(n)?;
    dynamical_optimum_with(e, alpha, kappa, rate_shape(n), loss_shape(n), 1.0)
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct FixedTimeSolution {
    pub gamma: f64,
    pub error: f64,
    /// `W₀` at the optimum.
    pub w: f64,
}

/// Ansatz error `γ²h/(g²f) + exp(−γTκα²f)` after time `T`.
pub fn fixed_time_error(gamma: f64, t: f64, alpha: f64, kappa: f64, f: f64, h: f64, g: f64) -> f64 {
    gamma * gamma / (g * g) * h / f + (-gamma * t * kappa * alpha * alpha * f).exp()
}

/// Linewidth minimizing the error reached at fixed time `t`.
pub fn fixed_time_optimum(t: f64, alpha: f64, kappa: f64, f: f64, h: f64, g: f64) -> Result<FixedTimeSolution> {
    if !(t > 0.0 && t.is_finite()) {
        return Err(invalid("time", format!("must be > 0, got {t}")));
    }
    let k = kappa * alpha * alpha;
    let z = t * t * k * k * f.powi(3) * g * g / (2.0 * h);
    let w = w0(z)?;
    Ok(FixedTimeSolution { gamma: w / (t * k * f), error: h / f.powi(3) * w * (w + 2.0) / (t * t * k * k * g * g), w })
}

/// Largest N reaching error `e` within `g·T` under weak driving.
pub fn qubit_bound_weak(gt: f64, kappa: f64, alpha: f64, e: f64) -> f64 {
    let l = (1.0 / e).ln();
    gt * gt * kappa * kappa * alpha.powi(4) * e / (l * l)
}

/// Largest N reaching error `e` within `g·T` with power broadening.
pub fn qubit_bound_strong(gt: f64, e: f64) -> f64 {
    gt.powf(2.0 / 3.0) * e.cbrt() / 16.0
}

/// `b·√N log²N/(α²g√E)`.
pub fn weak_time_bound(n: usize, e: f64, alpha: f64, b: f64) -> f64 {
    let nf = n as f64;
    let l = nf.ln();
    b * nf.sqrt() * l * l / (alpha * alpha * e.sqrt())
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct StrongDriveParams {
    pub n_qubits: usize,
    pub error: f64,
    /// Share of the error budget spent on Z losses, `E/5`.
    pub error_z: f64,
    pub gamma: f64,
    pub gamma_f: f64,
    /// Lagrange multiplier fixing `Ω_F² = λ(N−F)/F`.
    pub lambda: f64,
    /// Z amplitudes for `F = 1..N−1`.
    pub omega_z: Vec<f64>,
    /// Amplitude shared by the odd X tones.
    pub omega_x: f64,
}

pub fn strong_drive_params(n: usize, e: f64) -> Result<StrongDriveParams> {
    check_n(n)?;
    check_error(e)?;
    let nf = n as f64;
    let l = nf.ln();
    let ez = e / 5.0;
    let gamma = (8.0 * ez / (9.0 * nf * l * l)).sqrt();
    let lambda = 8.0 * ez / (9.0 * nf * (nf - 1.0) * l);
    let omega_z = (1..n).map(|f| (lambda * (n - f) as f64 / f as f64).sqrt()).collect();
    let omega_x = 2f64.powf(1.25) / (3.0 * 5f64.powf(0.25)) * ez.sqrt() / (nf.powf(1.5) * l.sqrt());
    let gamma_f = 4.0 / 5f64.sqrt() * ez.sqrt() / nf.sqrt();
    Ok(StrongDriveParams { n_qubits: n, error: e, error_z: ez, gamma, gamma_f, lambda, omega_z, omega_x })
}

impl StrongDriveParams {
    pub fn schedule(&self) -> Result<DriveSchedule> {
        DriveSchedule::new(self.n_qubits, 1.0, self.omega_z.clone(), vec![self.omega_x; x_tone_count(self.n_qubits)])
    }

    pub fn system_params(&self) -> Result<SystemParams> {
        SystemParams::symmetric(self.n_qubits, self.gamma, self.gamma_f)
    }

    /// Large-N Z pumping rate `(√2/9)√E_Z/(N^{3/2} log N)`.
    pub fn asymptotic_pumping_rate(&self) -> f64 {
        let nf = self.n_qubits as f64;
        2f64.sqrt() / 9.0 * self.error_z.sqrt() / (nf.powf(1.5) * nf.ln())
    }

    /// Worst-case Z pumping time to |GHZ⟩ with the exact harmonic sum.
    pub fn exact_pumping_time(&self) -> f64 {
        let n = self.n_qubits;
        let harmonic: f64 = (1..n).map(|k| 1.0 / k as f64).sum();
        4.0 * (n - 1) as f64 / self.gamma + 2.0 * self.gamma / self.lambda * harmonic
    }
}

/// Strong-driving prefactors in units of `g√E` with the stated powers of
/// `N` and `log N` divided out.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct StrongCoefficients {
    pub gamma: f64,
    pub gamma_f: f64,
    pub omega: f64,
    /// `Γ_+/Γ_Z^+` from the 3-compartment model.
    pub rate_ratio: f64,
    pub rate: f64,
    pub time: f64,
}

/// Evaluate the prefactors given the compartment rate ratio.
pub fn strong_coefficients(rate_ratio: f64) -> StrongCoefficients {
    let per_ez = 1.0 / 5f64.sqrt();
    let rate = rate_ratio * 2f64.sqrt() / 9.0 * per_ez;
    StrongCoefficients {
        gamma: (8.0f64 / 45.0).sqrt(),
        gamma_f: 4.0 / 5f64.sqrt() * per_ez,
        omega: 2f64.powf(1.25) / (3.0 * 5f64.powf(0.25)) * per_ez,
        rate_ratio,
        rate,
        time: 1.0 / rate,
    }
}
