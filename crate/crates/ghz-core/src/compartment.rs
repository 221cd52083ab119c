//! Population rate models over coarse-grained compartments.
//!
//! The transition matrix acts on column vectors of populations,
//! `ṗ = T p`, with `T[(i, j)]` the rate from compartment `j` to `i`.

use nalgebra::{DMatrix, DVector};
use serde::Serialize;

use crate::analytic::{compartment_correction, loss_correction};
use crate::drive::{DriveSchedule, Pumping};
use crate::error::{invalid, Error, Result};
use crate::params::SystemParams;
use crate::register::binomial;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
pub enum Provenance {
    Weak,
    PowerBroadened,
    /// Multiples of the pumping rate with the large-N log approximations.
    Asymptotic,
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct RateBundle {
    /// Pumping from the intermediate sectors into the GHZ pair.
    pub z_plus: f64,
    /// Depumping of |GHZ₋⟩ by X.
    pub x_plus: f64,
    /// X acting on the intermediate sectors.
    pub x_toss: f64,
    /// First pumping step out of `n₁ = N−1`.
    pub first_step: f64,
    pub z_minus: f64,
    pub x_minus: f64,
    pub provenance: Provenance,
}

impl RateBundle {
    pub fn total_loss(&self) -> f64 {
        self.z_minus + self.x_minus
    }

    fn validate(&self) -> Result<()> {
        let all = [self.z_plus, self.x_plus, self.x_toss, self.first_step, self.z_minus, self.x_minus];
        if all.iter().any(|r| !(r.is_finite() && *r >= 0.0)) {
            return Err(invalid("rates", "all rates must be finite and >= 0"));
        }
        if self.z_plus == 0.0 {
            return Err(invalid("rates", "pumping rate must be > 0"));
        }
        Ok(())
    }

    pub fn without_loss(mut self) -> Self {
        self.z_minus = 0.0;
        self.x_minus = 0.0;
        self
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
pub enum Layout {
    /// `n₁ = N−1`, `1 ≤ n₁ ≤ N−2`, |GHZ₋⟩, |GHZ⟩.
    Four { n_qubits: usize },
    /// `1 ≤ n₁ ≤ N−1`, |GHZ₋⟩, |GHZ⟩.
    Three,
}

#[derive(Clone, Debug, PartialEq)]
pub struct CompartmentModel {
    layout: Layout,
    labels: Vec<&'static str>,
    matrix: DMatrix<f64>,
    rates: RateBundle,
}

pub const FOUR_LABELS: [&str; 4] = ["outer", "inner", "ghz_minus", "ghz"];
pub const THREE_LABELS: [&str; 3] = ["sectors", "ghz_minus", "ghz"];

pub fn build_4compartment(n_qubits: usize, rates: RateBundle) -> Result<CompartmentModel> {
    if n_qubits < 2 {
        return Err(invalid("n_qubits", "need N >= 2"));
    }
    rates.validate()?;
    let r = &rates;
    let loss = r.total_loss();
    #[rustfmt::skip]
    let matrix = DMatrix::from_row_slice(4, 4, &[
        -r.first_step, r.x_toss,                 r.x_plus,  loss,
        r.first_step,  -(r.x_toss + r.z_plus),   0.0,       0.0,
        0.0,           0.5 * r.z_plus,           -r.x_plus, 0.0,
        0.0,           0.5 * r.z_plus,           0.0,       -loss,
    ]);
    Ok(CompartmentModel { layout: Layout::Four { n_qubits }, labels: FOUR_LABELS.to_vec(), matrix, rates })
}

pub fn build_3compartment_strong(rates: RateBundle) -> Result<CompartmentModel> {
    rates.validate()?;
    let r = &rates;
    let loss = r.total_loss();
    #[rustfmt::skip]
    let matrix = DMatrix::from_row_slice(3, 3, &[
        -2.0 * r.z_plus - r.x_toss, r.x_plus,  loss,
        r.z_plus + r.x_toss,        -r.x_plus, 0.0,
        r.z_plus,                   0.0,       -loss,
    ]);
    Ok(CompartmentModel { layout: Layout::Three, labels: THREE_LABELS.to_vec(), matrix, rates })
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct StationaryError {
    /// `1 − P_GHZ(∞)` from the null vector.
    pub exact: f64,
    /// First-order expansion in the loss rate.
    pub approximate: f64,
}

impl CompartmentModel {
    pub fn layout(&self) -> Layout {
        self.layout
    }
    pub fn labels(&self) -> &[&'static str] {
        &self.labels
    }
    pub fn matrix(&self) -> &DMatrix<f64> {
        &self.matrix
    }
    pub fn rates(&self) -> &RateBundle {
        &self.rates
    }
    pub fn len(&self) -> usize {
        self.labels.len()
    }
    pub fn is_empty(&self) -> bool {
        self.labels.is_empty()
    }
    /// Index of |GHZ⟩.
    pub fn target(&self) -> usize {
        self.len() - 1
    }
    /// Index of |GHZ₋⟩.
    pub fn worst(&self) -> usize {
        self.len() - 2
    }

    /// Copy with the column leaving |GHZ⟩ zeroed.
    pub fn without_loss(&self) -> Self {
        let mut m = self.clone();
        let t = self.target();
        m.matrix.column_mut(t).fill(0.0);
        m.rates = m.rates.without_loss();
        m
    }

    /// Largest |column sum|, zero for a conserving model.
    pub fn conservation_defect(&self) -> f64 {
        (0..self.len()).map(|j| self.matrix.column(j).sum().abs()).fold(0.0, f64::max)
    }

    pub fn evolve(&self, t: f64, p0: &[f64]) -> Result<Vec<f64>> {
        if p0.len() != self.len() {
            return Err(Error::Dimension { expected: self.len(), got: p0.len() });
        }
        let prop = (&self.matrix * t).exp();
        Ok((prop * DVector::from_column_slice(p0)).iter().copied().collect())
    }

    /// Normalized null vector of `T`.
    pub fn steady_state(&self) -> Result<Vec<f64>> {
        let svd = self.matrix.clone().svd(false, true);
        let scale = svd.singular_values.max().max(f64::MIN_POSITIVE);
        let null: Vec<usize> = (0..self.len()).filter(|&i| svd.singular_values[i] <= 1e-12 * scale).collect();
        if null.len() != 1 {
            return Err(Error::Degenerate { dim: null.len() });
        }
        let v_t = svd.v_t.as_ref().ok_or_else(|| Error::Numerical("svd without V".into()))?;
        let v: Vec<f64> = v_t.row(null[0]).iter().copied().collect();
        let s: f64 = v.iter().sum();
        Ok(v.iter().map(|x| (x / s).max(0.0)).collect())
    }

    pub fn stationary_error(&self) -> Result<StationaryError> {
        let p = self.steady_state()?;
        let ratio = self.rates.total_loss() / self.rates.z_plus;
        let approximate = match self.layout {
            Layout::Four { n_qubits } => ratio * (3.0 + 1.0 / (n_qubits as f64).ln()),
            Layout::Three => 2.5 * ratio,
        };
        Ok(StationaryError { exact: 1.0 - p[self.target()], approximate })
    }

    /// First time the |GHZ⟩ population reaches `target`, to a relative
    /// precision of `1e-9`. `None` if not reached by `t_max`.
    pub fn time_to_target(&self, p0: &[f64], target: f64, t_max: f64) -> Result<Option<f64>> {
        if !(target > 0.0 && target < 1.0) {
            return Err(invalid("target", "must lie in (0, 1)"));
        }
        if !(t_max > 0.0 && t_max.is_finite()) {
            return Err(invalid("t_max", "must be finite and > 0"));
        }
        let at = |t: f64| -> Result<f64> { Ok(self.evolve(t, p0)?[self.target()]) };
        if at(0.0)? >= target {
            return Ok(Some(0.0));
        }
        // coarse scan first: the population need not be monotone
        let steps = 200;
        let mut lo = 0.0;
        for k in 1..=steps {
            let hi = t_max * k as f64 / steps as f64;
            if at(hi)? >= target {
                let mut hi = hi;
                while hi - lo > 1e-9 * hi {
                    let mid = 0.5 * (lo + hi);
                    if at(mid)? >= target {
                        hi = mid;
                    } else {
                        lo = mid;
                    }
                }
                return Ok(Some(hi));
            }
            lo = hi;
        }
        Ok(None)
    }

    /// `Γ_+ = −log(1 − P_GHZ(t₀))/t₀` starting from |GHZ₋⟩.
    pub fn effective_rate(&self, drop_loss: bool, t0: f64) -> Result<f64> {
        if !(t0 > 0.0) {
            return Err(invalid("t0", "must be > 0"));
        }
        let model = if drop_loss { self.without_loss() } else { self.clone() };
        let mut p0 = vec![0.0; self.len()];
        p0[self.worst()] = 1.0;
        let p = model.evolve(t0, &p0)?;
        let reached = p[self.target()];
        if reached >= 1.0 {
            return Err(Error::Numerical(format!("target population {reached} >= 1 at t0 = {t0}")));
        }
        Ok(-(1.0 - reached).ln() / t0)
    }

    /// `Γ_+/Γ_Z^+` with `t₀ = 1/Γ_Z^+` and losses dropped.
    pub fn rate_ratio(&self) -> Result<f64> {
        let unit = self.rates.z_plus;
        Ok(self.effective_rate(true, 1.0 / unit)? / unit)
    }
}

/// Weak-driving bundle with every rate a printed multiple of `Γ_Z^+ = 1`.
pub fn asymptotic_bundle(n_qubits: usize, loss_ratio: f64) -> RateBundle {
    RateBundle {
        z_plus: 1.0,
        x_plus: 1.0,
        x_toss: 0.5,
        first_step: 3.0 * (n_qubits as f64).ln(),
        z_minus: loss_ratio,
        x_minus: 0.0,
        provenance: Provenance::Asymptotic,
    }
}

/// `−log(1 − P_GHZ(t₀))/(Γ_Z^+ t₀)` for the asymptotic 4-compartment model.
fn asymptotic_ratio(n_qubits: usize) -> Result<f64> {
    build_4compartment(n_qubits, asymptotic_bundle(n_qubits, 0.0))?.rate_ratio()
}

/// Prefactor `b(N)` of the weak-driving preparation time.
pub fn b_factor(n_qubits: usize) -> Result<f64> {
    let ratio = asymptotic_ratio(n_qubits)?;
    let root = (loss_correction(n_qubits) * compartment_correction(n_qubits)).sqrt();
    Ok(9.0 * 3f64.sqrt() / 8.0 / ratio * root)
}

/// Decay-rate matching constant `κ(N)` of the dynamical ansatz.
pub fn kappa_factor(n_qubits: usize) -> Result<f64> {
    Ok(3.0 * asymptotic_ratio(n_qubits)? * compartment_correction(n_qubits))
}

/// `Γ_+/Γ_Z^+` for the strong 3-compartment model with matched X rates.
pub fn strong_rate_ratio() -> Result<f64> {
    let bundle = RateBundle {
        z_plus: 1.0,
        x_plus: 1.0,
        x_toss: 0.5,
        first_step: 0.0,
        z_minus: 0.0,
        x_minus: 0.0,
        provenance: Provenance::Asymptotic,
    };
    build_3compartment_strong(bundle)?.rate_ratio()
}

fn z_linewidth(params: &SystemParams) -> f64 {
    params.gamma_e() + params.kappa_b()
}

fn x_linewidth(params: &SystemParams) -> f64 {
    params.gamma_f() + params.kappa_c()
}

/// Rate `n₁ → n₁−1` driven by the resonant tone `F = n₁`, both signs.
pub fn sector_transfer_rate(
    n1: usize,
    schedule: &DriveSchedule,
    params: &SystemParams,
    broadening: Option<f64>,
) -> Result<f64> {
    let n = params.n_qubits();
    if n1 < 1 || n1 >= n {
        return Err(Error::Sector { n: n1, max: n - 1 });
    }
    let om2 = schedule.z_rabi(n1).powi(2);
    let lw = z_linewidth(params);
    let extra = broadening.map_or(0.0, |eta| eta * n1 as f64 * om2);
    let denom = lw * lw + extra;
    if denom == 0.0 {
        return Err(invalid("gamma_e", "zero linewidth makes the rate undefined"));
    }
    Ok(2.0 * n1 as f64 * params.gamma_0e() * om2 / denom)
}

/// Mean pumping time from sector `from` down to `to` (sum of step times).
pub fn pumping_time(
    from: usize,
    to: usize,
    schedule: &DriveSchedule,
    params: &SystemParams,
    broadening: Option<f64>,
) -> Result<f64> {
    if from <= to {
        return Err(invalid("sectors", format!("need from > to, got {from} -> {to}")));
    }
    let mut total = 0.0;
    for n in to + 1..=from {
        let r = sector_transfer_rate(n, schedule, params, broadening)?;
        total += if r > 0.0 { 1.0 / r } else { f64::INFINITY };
    }
    Ok(total)
}

/// Worst-case time into |GHZ⟩: twice the time to `n₁ = 0`.
pub fn ghz_pumping_time(schedule: &DriveSchedule, params: &SystemParams, broadening: Option<f64>) -> Result<f64> {
    Ok(2.0 * pumping_time(params.n_qubits() - 1, 0, schedule, params, broadening)?)
}

/// X depumping rate of |GHZ₋⟩.
pub fn x_depumping_rate(schedule: &DriveSchedule, params: &SystemParams, broadening: Option<f64>) -> f64 {
    let n = params.n_qubits();
    let lw = x_linewidth(params);
    let norm = 2f64.powi(n as i32 - 1);
    schedule
        .indices(Pumping::X)
        .into_iter()
        .map(|f| {
            let om2 = schedule.x_rabi(f).powi(2);
            let extra = broadening.map_or(0.0, |eta| eta * f as f64 * om2);
            binomial(n, f) / norm * 2.0 * params.gamma_f() * f as f64 * om2 / (lw * lw + extra)
        })
        .sum()
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct GhzLoss {
    pub z_minus: f64,
    pub x_minus: f64,
    pub x_toss: f64,
}

/// Off-resonant losses out of |GHZ⟩ and the X toss rate.
pub fn ghz_loss_rates(schedule: &DriveSchedule, params: &SystemParams, broadening: Option<f64>) -> Result<GhzLoss> {
    if !params.is_symmetric_branching() {
        return Err(Error::AsymmetricBranching);
    }
    let n = params.n_qubits();
    let nf = n as f64;
    let g2 = params.g() * params.g();
    let z_sum: f64 = (1..n).map(|f| f as f64 * (schedule.z_rabi(f) / (n - f) as f64).powi(2)).sum();
    let z_minus = 3.0 * params.gamma_e() * nf / (16.0 * g2) * z_sum;
    let norm = 2f64.powi(n as i32 - 1);
    let mut x_minus = 0.0;
    for m in (0..=n).step_by(2) {
        let inner: f64 = schedule
            .indices(Pumping::X)
            .into_iter()
            .map(|f| f as f64 * (schedule.x_rabi(f) / (f as f64 - m as f64)).powi(2))
            .sum();
        x_minus += binomial(n, m) * m as f64 / norm * inner;
    }
    x_minus *= params.gamma_f() / (2.0 * g2);
    Ok(GhzLoss { z_minus, x_minus, x_toss: 0.5 * x_depumping_rate(schedule, params, broadening) })
}

/// Rates for the 4-compartment model evaluated from a concrete schedule.
///
/// The pumping rate is the inverse time from `n₁ = N−2` to `0`; with two
/// qubits that range is empty and the single step `1 → 0` is used. The first
/// step keeps the `3·log N` multiple of the pumping rate; use
/// [`sector_transfer_rate`] at `N−1` for the exact value.
pub fn weak_rate_bundle(
    schedule: &DriveSchedule,
    params: &SystemParams,
    broadening: Option<f64>,
) -> Result<RateBundle> {
    let n = params.n_qubits();
    let from = if n > 2 { n - 2 } else { 1 };
    let z_plus = 1.0 / pumping_time(from, 0, schedule, params, broadening)?;
    let loss = ghz_loss_rates(schedule, params, broadening)?;
    Ok(RateBundle {
        z_plus,
        x_plus: x_depumping_rate(schedule, params, broadening),
        x_toss: loss.x_toss,
        first_step: 3.0 * (n as f64).ln() * z_plus,
        z_minus: loss.z_minus,
        x_minus: loss.x_minus,
        provenance: if broadening.is_some() { Provenance::PowerBroadened } else { Provenance::Weak },
    })
}

/// Rates for the strong 3-compartment model: pumping is the inverse of the
/// full worst-case time into |GHZ⟩.
pub fn strong_rate_bundle(schedule: &DriveSchedule, params: &SystemParams, eta: f64) -> Result<RateBundle> {
    let z_plus = 1.0 / ghz_pumping_time(schedule, params, Some(eta))?;
    let loss = ghz_loss_rates(schedule, params, Some(eta))?;
    Ok(RateBundle {
        z_plus,
        x_plus: x_depumping_rate(schedule, params, Some(eta)),
        x_toss: loss.x_toss,
        first_step: 0.0,
        z_minus: loss.z_minus,
        x_minus: loss.x_minus,
        provenance: Provenance::PowerBroadened,
    })
}

/// Compartment populations of the fully mixed ground state.
pub fn mixed_populations_4(n_qubits: usize) -> Vec<f64> {
    let d = 2f64.powi(n_qubits as i32);
    let outer = n_qubits as f64 / d;
    let inner: f64 = (1..n_qubits.saturating_sub(1)).map(|k| binomial(n_qubits, k)).sum::<f64>() / d;
    vec![outer, inner, 1.0 / d, 1.0 / d]
}
