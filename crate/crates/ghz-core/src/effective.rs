//! Ground-space effective operators obtained by eliminating the excited
//! levels and the oscillators.
//!
//! Each tone contributes, per sector `n`, a cavity-loss operator `∝ P_n` and
//! per-atom decay operators `|0⟩_a⟨x|P_n`, `|1⟩_a⟨x|P_n` where `x` is `1`
//! (Z) or `−` (X). Operators are expressed in the pumping's native basis.

use num_complex::Complex64 as C64;
use std::collections::BTreeMap;
use std::f64::consts::FRAC_1_SQRT_2;

use crate::drive::{DriveSchedule, DriveTone, Pumping};
use crate::error::{invalid, Error, Result};
use crate::params::SystemParams;
use crate::register::{binomial, Basis, Sign};
use crate::sparse::SparseMatrix;

/// Default broadening factor for the effective denominators.
pub const DEFAULT_BROADENING: f64 = 2.0;

/// Bare complex detunings `(Δ − iγ/2, δ − iκ/2)` of a tone.
fn bare(tone: &DriveTone, params: &SystemParams) -> (C64, C64) {
    let (gamma, kappa) = match tone.pumping() {
        Pumping::Z => (params.gamma_e(), params.kappa_b()),
        Pumping::X => (params.gamma_f(), params.kappa_c()),
    };
    // the oscillator is taken degenerate with the excited level
    (C64::new(tone.detuning(), -gamma / 2.0), C64::new(tone.detuning(), -kappa / 2.0))
}

/// `Δ̃_n = Δ̃ − n g²/δ̃`.
pub fn effective_detuning(tone: &DriveTone, n: usize, params: &SystemParams) -> Result<C64> {
    let (big, small) = bare(tone, params);
    if n == 0 {
        return Ok(big);
    }
    if small.norm() == 0.0 {
        return Err(invalid("detuning", "oscillator detuning and loss both vanish"));
    }
    let g = params.g();
    Ok(big - n as f64 * g * g / small)
}

/// `g̃_n = g − Δ̃δ̃/(n g)`; undefined in the empty sector.
pub fn effective_coupling(tone: &DriveTone, n: usize, params: &SystemParams) -> Result<C64> {
    if n == 0 {
        return Err(Error::EmptySector);
    }
    let (big, small) = bare(tone, params);
    let g = params.g();
    Ok(g - big * small / (n as f64 * g))
}

/// AC Stark shift `−Re(nΩ²/(4Δ̃_n))` of sector `n`.
pub fn stark_shift(tone: &DriveTone, n: usize, params: &SystemParams) -> Result<f64> {
    if n == 0 || tone.rabi() == 0.0 {
        return Ok(0.0);
    }
    let d = effective_detuning(tone, n, params)?;
    let om2 = tone.rabi() * tone.rabi();
    Ok(-(n as f64 * om2 / (4.0 * d)).re)
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Channel {
    /// Loss of the mediating oscillator; keeps the ground state.
    Cavity,
    /// Spontaneous decay ending in `|0⟩`.
    DecayToZero,
    /// Spontaneous decay ending in `|1⟩`.
    DecayToOne,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct JumpLabel {
    pub pumping: Pumping,
    pub tone: usize,
    pub sign: Sign,
    pub sector: usize,
    pub channel: Channel,
    /// `None` for the collective cavity channel.
    pub atom: Option<usize>,
}

impl JumpLabel {
    /// Tone tuned onto this sector's dressed resonance.
    pub fn is_resonant(&self) -> bool {
        self.tone == self.sector
    }
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct EffectiveJump {
    pub label: JumpLabel,
    pub rate: f64,
}

impl EffectiveJump {
    /// `√rate · pattern · P_n` in the native basis of the pumping.
    pub fn operator(&self, n_qubits: usize) -> SparseMatrix {
        jump_operator(&self.label, self.rate, n_qubits)
    }
}

fn jump_operator(label: &JumpLabel, rate: f64, n_qubits: usize) -> SparseMatrix {
    let d = 1usize << n_qubits;
    let amp = rate.sqrt();
    let n = label.sector;
    let mut t = Vec::new();
    for i in (0..d).filter(|i| i.count_ones() as usize == n) {
        match (label.channel, label.atom) {
            (Channel::Cavity, _) | (_, None) => t.push((i, i, C64::new(amp, 0.0))),
            (ch, Some(a)) => {
                if i >> a & 1 == 0 {
                    continue;
                }
                let cleared = i & !(1 << a);
                match (label.pumping, ch) {
                    (Pumping::Z, Channel::DecayToZero) => t.push((cleared, i, C64::new(amp, 0.0))),
                    (Pumping::Z, _) => t.push((i, i, C64::new(amp, 0.0))),
                    // |0⟩ = (|+⟩+|−⟩)/√2, |1⟩ = (|+⟩−|−⟩)/√2 in the X basis
                    (Pumping::X, Channel::DecayToZero) => {
                        t.push((cleared, i, C64::new(amp * FRAC_1_SQRT_2, 0.0)));
                        t.push((i, i, C64::new(amp * FRAC_1_SQRT_2, 0.0)));
                    }
                    (Pumping::X, _) => {
                        t.push((cleared, i, C64::new(amp * FRAC_1_SQRT_2, 0.0)));
                        t.push((i, i, C64::new(-amp * FRAC_1_SQRT_2, 0.0)));
                    }
                }
            }
        }
    }
    SparseMatrix::from_triplets(d, d, t)
}

#[derive(Clone, Copy, Debug, Default, PartialEq)]
pub struct EffectiveOptions {
    /// Broadening factor η; `None` for the weak-driving operators.
    pub broadening: Option<f64>,
    /// Keep only jumps whose tone is resonant with their sector.
    pub resonant_only: bool,
}

impl EffectiveOptions {
    pub fn broadened(eta: f64) -> Self {
        Self { broadening: Some(eta), resonant_only: false }
    }
}

/// Effective jumps and the diagonal Stark Hamiltonian of one pumping.
#[derive(Clone, Debug)]
pub struct EffectiveModel {
    pumping: Pumping,
    n_qubits: usize,
    jumps: Vec<EffectiveJump>,
    /// Σ over tones of the Stark shift, indexed by sector.
    stark: Vec<f64>,
    /// Largest single-tone shift magnitude, for relative cancellation checks.
    stark_scale: f64,
    options: EffectiveOptions,
}

/// Denominator `|x|² + η n (Ω/2)²`. The broadening acts on the half-Rabi
/// amplitude that enters the operators, so the two-level transfer rate
/// becomes `2nγ₀Ω²/(γ² + ηnΩ²)`.
fn denominator(x: C64, n: usize, rabi: f64, broadening: Option<f64>) -> f64 {
    let extra = broadening.map_or(0.0, |eta| eta * n as f64 * rabi * rabi / 4.0);
    x.norm_sqr() + extra
}

#[allow(clippy::needless_range_loop)]
pub fn build_effective_model(
    pumping: Pumping,
    schedule: &DriveSchedule,
    params: &SystemParams,
    options: EffectiveOptions,
) -> Result<EffectiveModel> {
    let n_qubits = params.n_qubits();
    if schedule.n_qubits() != n_qubits {
        return Err(invalid("schedule", "qubit count differs from system parameters"));
    }
    if let Some(eta) = options.broadening {
        if !(eta.is_finite() && eta >= 0.0) {
            return Err(invalid("broadening", format!("must be >= 0, got {eta}")));
        }
    }
    let (kappa, g0, g1) = match pumping {
        Pumping::Z => (params.kappa_b(), params.gamma_0e(), params.gamma_1e()),
        Pumping::X => (params.kappa_c(), params.gamma_0f(), params.gamma_1f()),
    };
    let mut jumps = Vec::new();
    let mut stark = vec![0.0; n_qubits + 1];
    let mut stark_scale: f64 = 0.0;
    for tone in schedule.tones(pumping) {
        let om2 = tone.rabi() * tone.rabi();
        for n in 0..=n_qubits {
            let s = stark_shift(&tone, n, params)?;
            stark[n] += s;
            stark_scale = stark_scale.max(s.abs());
            // nothing to excite in the empty sector
            if n == 0 || (options.resonant_only && n != tone.index()) {
                continue;
            }
            let label =
                |channel, atom| JumpLabel { pumping, tone: tone.index(), sign: tone.sign(), sector: n, channel, atom };
            if kappa > 0.0 {
                let gt = effective_coupling(&tone, n, params)?;
                let rate = kappa * om2 / (4.0 * denominator(gt, n, tone.rabi(), options.broadening));
                jumps.push(EffectiveJump { label: label(Channel::Cavity, None), rate });
            }
            let dt = effective_detuning(&tone, n, params)?;
            let den = 4.0 * denominator(dt, n, tone.rabi(), options.broadening);
            for a in 0..n_qubits {
                for (channel, gamma) in [(Channel::DecayToZero, g0), (Channel::DecayToOne, g1)] {
                    if gamma > 0.0 {
                        jumps.push(EffectiveJump { label: label(channel, Some(a)), rate: gamma * om2 / den });
                    }
                }
            }
        }
    }
    Ok(EffectiveModel { pumping, n_qubits, jumps, stark, stark_scale, options })
}

impl EffectiveModel {
    pub fn pumping(&self) -> Pumping {
        self.pumping
    }
    pub fn basis(&self) -> Basis {
        self.pumping.native_basis()
    }
    pub fn n_qubits(&self) -> usize {
        self.n_qubits
    }
    pub fn dim(&self) -> usize {
        1 << self.n_qubits
    }
    pub fn jumps(&self) -> &[EffectiveJump] {
        &self.jumps
    }
    pub fn options(&self) -> EffectiveOptions {
        self.options
    }
    pub fn is_empty(&self) -> bool {
        self.jumps.is_empty() && self.stark.iter().all(|s| *s == 0.0)
    }

    /// Total Stark shift of each sector.
    pub fn stark_by_sector(&self) -> &[f64] {
        &self.stark
    }

    /// Largest shift contributed by a single tone.
    pub fn stark_scale(&self) -> f64 {
        self.stark_scale
    }

    /// Diagonal Stark Hamiltonian `Σ_n s_n P_n`.
    pub fn hamiltonian(&self) -> SparseMatrix {
        let diag: Vec<C64> = (0..self.dim()).map(|i| C64::new(self.stark[i.count_ones() as usize], 0.0)).collect();
        SparseMatrix::diagonal(&diag)
    }

    /// Jumps sharing an operator pattern merged by summing rates; the
    /// dissipator is unchanged because the patterns are identical.
    pub fn aggregated_operators(&self) -> Vec<SparseMatrix> {
        let mut merged: BTreeMap<(Channel, Option<usize>, usize), (JumpLabel, f64)> = BTreeMap::new();
        for j in &self.jumps {
            let key = (j.label.channel, j.label.atom, j.label.sector);
            merged.entry(key).or_insert((j.label, 0.0)).1 += j.rate;
        }
        merged.values().filter(|(_, r)| *r > 0.0).map(|(l, r)| jump_operator(l, *r, self.n_qubits)).collect()
    }

    /// Total rate summed over every jump with the given filter.
    pub fn total_rate(&self, mut keep: impl FnMut(&JumpLabel) -> bool) -> f64 {
        self.jumps.iter().filter(|j| keep(&j.label)).map(|j| j.rate).sum()
    }
}

/// Drive-induced excited population of |GHZ⟩, summed over tones.
///
/// The expressions are linear in the Rabi amplitude as they are usually
/// quoted; a dimensionally consistent estimate would be quadratic.
pub fn excited_population(schedule: &DriveSchedule, params: &SystemParams) -> f64 {
    let n = params.n_qubits();
    let nf = n as f64;
    let g2 = params.g() * params.g();
    let mut total = 0.0;
    for f in schedule.indices(Pumping::Z) {
        let om = schedule.z_rabi(f);
        let sf = (f as f64).sqrt();
        let sn = nf.sqrt();
        total += nf * om / (8.0 * (sn + sf).powi(2) * g2) + nf * om / (8.0 * (sn - sf).powi(2) * g2);
    }
    for f in schedule.indices(Pumping::X) {
        let om = schedule.x_rabi(f);
        if om == 0.0 {
            continue;
        }
        let sf = (f as f64).sqrt();
        for m in (2..=n).step_by(2) {
            let sm = (m as f64).sqrt();
            let w = binomial(n, m) * m as f64 * om;
            total += w / (4.0 * (sm + sf).powi(2) * g2) + w / (4.0 * (sm - sf).powi(2) * g2);
        }
    }
    total
}
