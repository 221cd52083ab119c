//! Qubit register: basis tags, GHZ states, sector projectors, Z↔X change.
//!
//! Bit `a` of a basis index is qubit `a`. In the Z basis a set bit is |1>,
//! in the X basis it is |->, so the Hamming weight of an index is the
//! sector count in either basis.

use nalgebra::{DMatrix, DVector};
use num_complex::Complex64 as C64;
use std::f64::consts::FRAC_1_SQRT_2;

use crate::error::{invalid, Error, Result};

/// Largest register handled densely.
pub const MAX_QUBITS: usize = 12;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, serde::Serialize, serde::Deserialize)]
pub enum Basis {
    Z,
    X,
}

impl Basis {
    pub fn other(self) -> Basis {
        match self {
            Basis::Z => Basis::X,
            Basis::X => Basis::Z,
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Sign {
    Plus,
    Minus,
}

impl Sign {
    pub fn value(self) -> f64 {
        match self {
            Sign::Plus => 1.0,
            Sign::Minus => -1.0,
        }
    }

    pub const BOTH: [Sign; 2] = [Sign::Plus, Sign::Minus];
}

fn check_qubits(n: usize) -> Result<()> {
    if n == 0 || n > MAX_QUBITS {
        return Err(invalid("n_qubits", format!("need 1..={MAX_QUBITS}, got {n}")));
    }
    Ok(())
}

pub fn binomial(n: usize, k: usize) -> f64 {
    if k > n {
        return 0.0;
    }
    let k = k.min(n - k);
    (0..k).fold(1.0, |acc, i| acc * (n - i) as f64 / (i + 1) as f64)
}

/// Pure state of the register.
#[derive(Clone, Debug, PartialEq)]
pub struct GroundState {
    n_qubits: usize,
    amps: DVector<C64>,
    basis: Basis,
}

impl GroundState {
    pub fn new(n_qubits: usize, amps: DVector<C64>, basis: Basis) -> Result<Self> {
        check_qubits(n_qubits)?;
        if amps.len() != 1 << n_qubits {
            return Err(Error::Dimension { expected: 1 << n_qubits, got: amps.len() });
        }
        Ok(Self { n_qubits, amps, basis })
    }

    pub fn basis_state(n_qubits: usize, index: usize, basis: Basis) -> Result<Self> {
        check_qubits(n_qubits)?;
        let d = 1 << n_qubits;
        if index >= d {
            return Err(Error::Dimension { expected: d, got: index });
        }
        let mut amps = DVector::zeros(d);
        amps[index] = C64::new(1.0, 0.0);
        Ok(Self { n_qubits, amps, basis })
    }

    pub fn n_qubits(&self) -> usize {
        self.n_qubits
    }
    pub fn dim(&self) -> usize {
        self.amps.len()
    }
    pub fn basis(&self) -> Basis {
        self.basis
    }
    pub fn amplitudes(&self) -> &DVector<C64> {
        &self.amps
    }
    pub fn norm(&self) -> f64 {
        self.amps.norm()
    }

    pub fn inner(&self, other: &GroundState) -> Result<C64> {
        same_frame(self.dim(), self.basis, other.dim(), other.basis)?;
        Ok(self.amps.dotc(&other.amps))
    }

    /// Probability mass per Hamming weight in the state's own basis.
    pub fn weight_distribution(&self) -> Vec<f64> {
        let mut w = vec![0.0; self.n_qubits + 1];
        for (i, a) in self.amps.iter().enumerate() {
            w[i.count_ones() as usize] += a.norm_sqr();
        }
        w
    }
}

fn same_frame(d1: usize, b1: Basis, d2: usize, b2: Basis) -> Result<()> {
    if d1 != d2 {
        return Err(Error::Dimension { expected: d1, got: d2 });
    }
    if b1 != b2 {
        return Err(Error::BasisMismatch { expected: b1, got: b2 });
    }
    Ok(())
}

/// (|0…0> ± |1…1>)/√2 in the Z basis.
pub fn ghz_state(n_qubits: usize, sign: Sign) -> Result<GroundState> {
    check_qubits(n_qubits)?;
    let d = 1usize << n_qubits;
    let mut amps = DVector::zeros(d);
    amps[0] = C64::new(FRAC_1_SQRT_2, 0.0);
    amps[d - 1] += C64::new(sign.value() * FRAC_1_SQRT_2, 0.0);
    Ok(GroundState { n_qubits, amps, basis: Basis::Z })
}

/// Density matrix with an explicit basis tag. Also used for the enlarged
/// atom–oscillator space, which is always tagged Z.
#[derive(Clone, Debug, PartialEq)]
pub struct DensityMatrix {
    mat: DMatrix<C64>,
    basis: Basis,
}

impl DensityMatrix {
    pub fn new(mat: DMatrix<C64>, basis: Basis) -> Result<Self> {
        if !mat.is_square() {
            return Err(Error::Dimension { expected: mat.nrows(), got: mat.ncols() });
        }
        Ok(Self { mat, basis })
    }

    pub fn from_pure(psi: &GroundState) -> Self {
        let m = &psi.amps * psi.amps.adjoint();
        Self { mat: m, basis: psi.basis }
    }

    pub fn maximally_mixed(dim: usize, basis: Basis) -> Self {
        let mut m = DMatrix::zeros(dim, dim);
        for i in 0..dim {
            m[(i, i)] = C64::new(1.0 / dim as f64, 0.0);
        }
        Self { mat: m, basis }
    }

    pub fn dim(&self) -> usize {
        self.mat.nrows()
    }
    pub fn basis(&self) -> Basis {
        self.basis
    }
    pub fn matrix(&self) -> &DMatrix<C64> {
        &self.mat
    }
    pub fn into_matrix(self) -> DMatrix<C64> {
        self.mat
    }
    pub fn trace(&self) -> C64 {
        self.mat.trace()
    }

    pub fn hermiticity_defect(&self) -> f64 {
        (&self.mat - self.mat.adjoint()).camax()
    }

    pub fn symmetrize(&mut self) {
        let h = (&self.mat + self.mat.adjoint()) * C64::new(0.5, 0.0);
        self.mat = h;
    }

    pub fn eigenvalues(&self) -> Vec<f64> {
        let h = (&self.mat + self.mat.adjoint()) * C64::new(0.5, 0.0);
        let mut ev: Vec<f64> = h.symmetric_eigenvalues().iter().copied().collect();
        ev.sort_by(|a, b| a.total_cmp(b));
        ev
    }

    pub fn min_eigenvalue(&self) -> f64 {
        self.eigenvalues().first().copied().unwrap_or(0.0)
    }

    pub fn populations(&self) -> Vec<f64> {
        (0..self.dim()).map(|i| self.mat[(i, i)].re).collect()
    }

    /// Leading `d × d` block, e.g. the ground manifold of the enlarged space.
    pub fn leading_block(&self, d: usize) -> Result<DensityMatrix> {
        if d > self.dim() {
            return Err(Error::Dimension { expected: self.dim(), got: d });
        }
        Ok(Self { mat: self.mat.view((0, 0), (d, d)).into_owned(), basis: self.basis })
    }
}

/// ⟨ψ|ρ|ψ⟩.
pub fn fidelity(rho: &DensityMatrix, target: &GroundState) -> Result<f64> {
    same_frame(target.dim(), target.basis, rho.dim(), rho.basis)?;
    let v = &target.amps;
    Ok(v.dotc(&(&rho.mat * v)).re)
}

/// Projector onto one Hamming-weight sector, kept as an index set.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct SectorProjector {
    n_qubits: usize,
    weight: usize,
    basis: Basis,
    indices: Vec<usize>,
}

pub fn sector_projector(n_qubits: usize, n: usize, basis: Basis) -> Result<SectorProjector> {
    check_qubits(n_qubits)?;
    if n > n_qubits {
        return Err(Error::Sector { n, max: n_qubits });
    }
    let indices = (0..1usize << n_qubits).filter(|i| i.count_ones() as usize == n).collect();
    Ok(SectorProjector { n_qubits, weight: n, basis, indices })
}

impl SectorProjector {
    pub fn weight(&self) -> usize {
        self.weight
    }
    pub fn basis(&self) -> Basis {
        self.basis
    }
    pub fn rank(&self) -> usize {
        self.indices.len()
    }
    pub fn indices(&self) -> &[usize] {
        &self.indices
    }
    pub fn contains(&self, i: usize) -> bool {
        i.count_ones() as usize == self.weight && i < 1 << self.n_qubits
    }

    pub fn to_matrix(&self) -> DMatrix<C64> {
        let d = 1 << self.n_qubits;
        let mut m = DMatrix::zeros(d, d);
        for &i in &self.indices {
            m[(i, i)] = C64::new(1.0, 0.0);
        }
        m
    }

    pub fn apply(&self, psi: &GroundState) -> Result<GroundState> {
        same_frame(1 << self.n_qubits, self.basis, psi.dim(), psi.basis)?;
        let mut out = psi.clone();
        for (i, a) in out.amps.iter_mut().enumerate() {
            if !self.contains(i) {
                *a = C64::new(0.0, 0.0);
            }
        }
        Ok(out)
    }

    pub fn expectation(&self, rho: &DensityMatrix) -> Result<f64> {
        same_frame(1 << self.n_qubits, self.basis, rho.dim(), rho.basis)?;
        Ok(self.indices.iter().map(|&i| rho.mat[(i, i)].re).sum())
    }
}

/// Normalized Walsh–Hadamard transform of `len` elements spaced by `stride`.
pub(crate) fn hadamard_strided(data: &mut [C64], offset: usize, stride: usize, len: usize) {
    let mut h = 1;
    while h < len {
        for start in (0..len).step_by(2 * h) {
            for j in start..start + h {
                let a = offset + j * stride;
                let b = offset + (j + h) * stride;
                let (x, y) = (data[a], data[b]);
                data[a] = (x + y) * FRAC_1_SQRT_2;
                data[b] = (x - y) * FRAC_1_SQRT_2;
            }
        }
        h *= 2;
    }
}

/// H⊗N · M · H⊗N on a column-major `d × d` buffer.
pub(crate) fn hadamard_conjugate(data: &mut [C64], d: usize) {
    for col in 0..d {
        hadamard_strided(data, col * d, 1, d);
    }
    for row in 0..d {
        hadamard_strided(data, row, d, d);
    }
}

/// Per-qubit |±> = (|0> ± |1>)/√2 change of representation.
pub trait BasisChange: Sized {
    fn to_basis(&self, target: Basis) -> Result<Self>;
}

impl BasisChange for GroundState {
    fn to_basis(&self, target: Basis) -> Result<Self> {
        let mut out = self.clone();
        if target != self.basis {
            let d = out.dim();
            hadamard_strided(out.amps.as_mut_slice(), 0, 1, d);
            out.basis = target;
        }
        Ok(out)
    }
}

impl BasisChange for DensityMatrix {
    fn to_basis(&self, target: Basis) -> Result<Self> {
        let d = self.dim();
        if !d.is_power_of_two() {
            return Err(invalid("density matrix", format!("dimension {d} is not a qubit register")));
        }
        let mut out = self.clone();
        if target != self.basis {
            hadamard_conjugate(out.mat.as_mut_slice(), d);
            out.basis = target;
        }
        Ok(out)
    }
}

pub fn basis_change<T: BasisChange>(x: &T, target: Basis) -> Result<T> {
    x.to_basis(target)
}
