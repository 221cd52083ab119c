//! Multi-tone classical drives for the two pumping configurations.

use crate::error::{invalid, Result};
use crate::register::{Basis, Sign};

/// Which transition a tone addresses: Z drives |1>→|e>, X drives |->→|f>.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Pumping {
    Z,
    X,
}

impl Pumping {
    /// Basis in which the sector projectors of this configuration are diagonal.
    pub fn native_basis(self) -> Basis {
        match self {
            Pumping::Z => Basis::Z,
            Pumping::X => Basis::X,
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct DriveTone {
    pumping: Pumping,
    index: usize,
    sign: Sign,
    rabi: f64,
    detuning: f64,
}

impl DriveTone {
    /// Tone `F` with detuning ±√F·g, i.e. on the F-th dressed resonance.
    pub fn new(pumping: Pumping, index: usize, sign: Sign, rabi: f64, g: f64) -> Result<Self> {
        if index == 0 {
            return Err(invalid("tone index", "F starts at 1"));
        }
        if !(rabi.is_finite() && rabi >= 0.0) {
            return Err(invalid("rabi", format!("must be >= 0, got {rabi}")));
        }
        if pumping == Pumping::X && index.is_multiple_of(2) && rabi != 0.0 {
            return Err(invalid("rabi", format!("X tone F={index} is even and must stay off")));
        }
        let detuning = sign.value() * (index as f64).sqrt() * g;
        Ok(Self { pumping, index, sign, rabi, detuning })
    }

    pub fn with_detuning(mut self, detuning: f64) -> Self {
        self.detuning = detuning;
        self
    }

    pub fn pumping(&self) -> Pumping {
        self.pumping
    }
    pub fn index(&self) -> usize {
        self.index
    }
    pub fn sign(&self) -> Sign {
        self.sign
    }
    pub fn rabi(&self) -> f64 {
        self.rabi
    }
    pub fn detuning(&self) -> f64 {
        self.detuning
    }
}

/// Amplitudes of all tones. Each index carries one amplitude shared by the
/// ± pair, which is what makes the Stark shifts cancel.
#[derive(Clone, Debug, PartialEq)]
pub struct DriveSchedule {
    n_qubits: usize,
    g: f64,
    /// Z amplitudes for F = 1..N-1.
    z_rabi: Vec<f64>,
    /// X amplitudes for odd F = 1, 3, .. ≤ N.
    x_rabi: Vec<f64>,
}

pub fn x_indices(n_qubits: usize) -> impl Iterator<Item = usize> {
    (1..=n_qubits).step_by(2)
}

pub fn x_tone_count(n_qubits: usize) -> usize {
    n_qubits.div_ceil(2)
}

impl DriveSchedule {
    pub fn new(n_qubits: usize, g: f64, z_rabi: Vec<f64>, x_rabi: Vec<f64>) -> Result<Self> {
        if n_qubits < 2 {
            return Err(invalid("n_qubits", "need N >= 2"));
        }
        if z_rabi.len() != n_qubits - 1 {
            return Err(invalid("z_rabi", format!("expected {} amplitudes, got {}", n_qubits - 1, z_rabi.len())));
        }
        if x_rabi.len() != x_tone_count(n_qubits) {
            return Err(invalid(
                "x_rabi",
                format!("expected {} amplitudes, got {}", x_tone_count(n_qubits), x_rabi.len()),
            ));
        }
        if let Some(bad) = z_rabi.iter().chain(&x_rabi).find(|v| !(v.is_finite() && **v >= 0.0)) {
            return Err(invalid("rabi", format!("amplitudes must be >= 0, got {bad}")));
        }
        Ok(Self { n_qubits, g, z_rabi, x_rabi })
    }

    pub fn zero(n_qubits: usize, g: f64) -> Result<Self> {
        Self::new(n_qubits, g, vec![0.0; n_qubits - 1], vec![0.0; x_tone_count(n_qubits)])
    }

    pub fn n_qubits(&self) -> usize {
        self.n_qubits
    }
    pub fn g(&self) -> f64 {
        self.g
    }
    pub fn z_amplitudes(&self) -> &[f64] {
        &self.z_rabi
    }
    pub fn x_amplitudes(&self) -> &[f64] {
        &self.x_rabi
    }

    pub fn z_rabi(&self, f: usize) -> f64 {
        if f >= 1 && f < self.n_qubits {
            self.z_rabi[f - 1]
        } else {
            0.0
        }
    }

    pub fn x_rabi(&self, f: usize) -> f64 {
        if f % 2 == 1 && f <= self.n_qubits {
            self.x_rabi[(f - 1) / 2]
        } else {
            0.0
        }
    }

    pub fn rabi(&self, pumping: Pumping, f: usize) -> f64 {
        match pumping {
            Pumping::Z => self.z_rabi(f),
            Pumping::X => self.x_rabi(f),
        }
    }

    /// Tone indices used by a configuration.
    pub fn indices(&self, pumping: Pumping) -> Vec<usize> {
        match pumping {
            Pumping::Z => (1..self.n_qubits).collect(),
            Pumping::X => x_indices(self.n_qubits).collect(),
        }
    }

    /// Both signs of every tone with non-zero amplitude.
    pub fn tones(&self, pumping: Pumping) -> Vec<DriveTone> {
        let mut out = Vec::new();
        for f in self.indices(pumping) {
            let rabi = self.rabi(pumping, f);
            if rabi == 0.0 {
                continue;
            }
            for sign in Sign::BOTH {
                out.push(DriveTone::new(pumping, f, sign, rabi, self.g).expect("validated"));
            }
        }
        out
    }

    pub fn scaled(&self, factor: f64) -> Self {
        Self {
            n_qubits: self.n_qubits,
            g: self.g,
            z_rabi: self.z_rabi.iter().map(|v| v * factor).collect(),
            x_rabi: self.x_rabi.iter().map(|v| v * factor).collect(),
        }
    }

    pub fn without(&self, pumping: Pumping) -> Self {
        let mut s = self.clone();
        match pumping {
            Pumping::Z => s.z_rabi.iter_mut().for_each(|v| *v = 0.0),
            Pumping::X => s.x_rabi.iter_mut().for_each(|v| *v = 0.0),
        }
        s
    }
}
