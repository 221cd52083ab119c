//! Physical constants of the N-atom, two-oscillator model.

use crate::error::{invalid, Result};

/// Decay rates and coupling of the register.
///
/// Total excited-state widths are derived from the branching rates so the
/// sum rule holds exactly.
#[derive(Clone, Debug, PartialEq)]
pub struct SystemParams {
    n_qubits: usize,
    g: f64,
    gamma_0e: f64,
    gamma_1e: f64,
    gamma_0f: f64,
    gamma_1f: f64,
    kappa_b: f64,
    kappa_c: f64,
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Branching {
    pub to_zero: f64,
    pub to_one: f64,
}

impl Branching {
    pub fn symmetric(total: f64) -> Self {
        Self { to_zero: total / 2.0, to_one: total / 2.0 }
    }

    pub fn total(&self) -> f64 {
        self.to_zero + self.to_one
    }
}

fn check_rate(name: &'static str, v: f64) -> Result<()> {
    if !(v.is_finite() && v >= 0.0) {
        return Err(invalid(name, format!("must be finite and >= 0, got {v}")));
    }
    Ok(())
}

impl SystemParams {
    pub fn new(n_qubits: usize, g: f64, e: Branching, f: Branching, kappa_b: f64, kappa_c: f64) -> Result<Self> {
        if n_qubits < 2 {
            return Err(invalid("n_qubits", format!("need N >= 2, got {n_qubits}")));
        }
        if !(g.is_finite() && g > 0.0) {
            return Err(invalid("g", format!("must be > 0, got {g}")));
        }
        check_rate("gamma_0e", e.to_zero)?;
        check_rate("gamma_1e", e.to_one)?;
        check_rate("gamma_0f", f.to_zero)?;
        check_rate("gamma_1f", f.to_one)?;
        check_rate("kappa_b", kappa_b)?;
        check_rate("kappa_c", kappa_c)?;
        Ok(Self {
            n_qubits,
            g,
            gamma_0e: e.to_zero,
            gamma_1e: e.to_one,
            gamma_0f: f.to_zero,
            gamma_1f: f.to_one,
            kappa_b,
            kappa_c,
        })
    }

    /// Equal branching into |0> and |1>, lossless oscillators, g = 1.
    pub fn symmetric(n_qubits: usize, gamma_e: f64, gamma_f: f64) -> Result<Self> {
        Self::new(n_qubits, 1.0, Branching::symmetric(gamma_e), Branching::symmetric(gamma_f), 0.0, 0.0)
    }

    pub fn with_oscillator_loss(mut self, kappa_b: f64, kappa_c: f64) -> Result<Self> {
        check_rate("kappa_b", kappa_b)?;
        check_rate("kappa_c", kappa_c)?;
        self.kappa_b = kappa_b;
        self.kappa_c = kappa_c;
        Ok(self)
    }

    pub fn n_qubits(&self) -> usize {
        self.n_qubits
    }
    pub fn g(&self) -> f64 {
        self.g
    }
    pub fn gamma_e(&self) -> f64 {
        self.gamma_0e + self.gamma_1e
    }
    pub fn gamma_f(&self) -> f64 {
        self.gamma_0f + self.gamma_1f
    }
    pub fn gamma_0e(&self) -> f64 {
        self.gamma_0e
    }
    pub fn gamma_1e(&self) -> f64 {
        self.gamma_1e
    }
    pub fn gamma_0f(&self) -> f64 {
        self.gamma_0f
    }
    pub fn gamma_1f(&self) -> f64 {
        self.gamma_1f
    }
    pub fn kappa_b(&self) -> f64 {
        self.kappa_b
    }
    pub fn kappa_c(&self) -> f64 {
        self.kappa_c
    }

    pub fn is_symmetric_branching(&self) -> bool {
        let close = |a: f64, b: f64| (a - b).abs() <= 1e-12 * (a.abs() + b.abs()).max(1e-300);
        close(self.gamma_0e, self.gamma_1e) && close(self.gamma_0f, self.gamma_1f)
    }
}
