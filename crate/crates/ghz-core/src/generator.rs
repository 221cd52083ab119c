//! Lindblad generator `ρ ↦ −i[H,ρ] + Σ(LρL† − ½{L†L,ρ})` acting on dense
//! column-major density matrices.
//!
//! A generator is a sum of blocks. Each block lives in its own basis; when
//! that differs from the basis of the state, ρ is Hadamard-conjugated on the
//! way in and out. This lets Z and X effective models act on one state.

use nalgebra::DMatrix;
use num_complex::Complex64 as C64;

use crate::effective::EffectiveModel;
use crate::error::{Error, Result};
use crate::full::{HamTerm, LindbladModel};
use crate::register::{hadamard_conjugate, Basis};
use crate::sparse::SparseMatrix;

const I: C64 = C64 { re: 0.0, im: 1.0 };

#[derive(Clone, Debug)]
struct Block {
    basis: Basis,
    /// Static part of `K = H − (i/2)ΣL†L`.
    k_static: SparseMatrix,
    /// Time-dependent Hamiltonian terms.
    k_terms: Vec<HamTerm>,
    jumps: Vec<SparseMatrix>,
}

impl Block {
    fn new(basis: Basis, hamiltonian: SparseMatrix, dynamic: Vec<HamTerm>, jumps: Vec<SparseMatrix>) -> Self {
        let d = hamiltonian.rows();
        let decay = jumps.iter().fold(SparseMatrix::zeros(d, d), |acc, l| acc.add(&l.adjoint().matmul(l)));
        let k_static = hamiltonian.add(&decay.scale(C64::new(0.0, -0.5)));
        let jumps = jumps.into_iter().filter(|l| !l.is_zero()).collect();
        Self { basis, k_static, k_terms: dynamic, jumps }
    }

    /// `out += −iKρ + iρK† + ΣLρL†` with `K` frozen at `t`.
    fn accumulate(&self, t: f64, rho: &[C64], d: usize, out: &mut [C64]) {
        let mut apply_k = |k: &SparseMatrix, s: C64| {
            let si = -I * s;
            for &(r, c, v) in k.entries() {
                let a = si * v;
                let b = (si * v).conj();
                for j in 0..d {
                    out[r + j * d] += a * rho[c + j * d];
                }
                // iρK† : column r of K† picks row r of K
                for i in 0..d {
                    out[i + r * d] += b * rho[i + c * d];
                }
            }
        };
        apply_k(&self.k_static, C64::new(1.0, 0.0));
        for term in &self.k_terms {
            apply_k(&term.op, term.coefficient(t));
        }
        for l in &self.jumps {
            l.sandwich_acc(rho, out);
        }
    }

    /// Same as `accumulate` for Hermitian ρ: `−iKρ` is formed once and
    /// `iρK†` taken as its adjoint.
    fn accumulate_hermitian(&self, t: f64, rho: &[C64], d: usize, out: &mut [C64], scratch: &mut [C64]) {
        scratch.iter_mut().for_each(|x| *x = C64::default());
        let mut entries: Vec<(usize, usize, C64)> = Vec::new();
        let mut push = |k: &SparseMatrix, s: C64| {
            let si = -I * s;
            entries.extend(k.entries().iter().map(|&(r, c, v)| (r, c, si * v)));
        };
        push(&self.k_static, C64::new(1.0, 0.0));
        for term in &self.k_terms {
            push(&term.op, term.coefficient(t));
        }
        for (col, dst) in rho.chunks_exact(d).zip(scratch.chunks_exact_mut(d)) {
            for &(r, c, a) in &entries {
                dst[r] += a * col[c];
            }
        }
        for j in 0..d {
            for i in 0..d {
                out[i + j * d] += scratch[i + j * d] + scratch[j + i * d].conj();
            }
        }
        for l in &self.jumps {
            l.sandwich_acc(rho, out);
        }
    }

    fn is_static(&self) -> bool {
        self.k_terms.iter().all(HamTerm::is_static)
    }
}

#[derive(Clone, Debug)]
pub struct Liouvillian {
    dim: usize,
    ground_dim: usize,
    basis: Basis,
    blocks: Vec<Block>,
}

impl Liouvillian {
    /// Single block in the state basis.
    pub fn from_parts(basis: Basis, hamiltonian: SparseMatrix, jumps: Vec<SparseMatrix>) -> Result<Self> {
        let d = hamiltonian.rows();
        for l in &jumps {
            if l.rows() != d || l.cols() != d {
                return Err(Error::Dimension { expected: d, got: l.rows() });
            }
        }
        Ok(Self { dim: d, ground_dim: d, basis, blocks: vec![Block::new(basis, hamiltonian, vec![], jumps)] })
    }

    pub fn from_full(model: &LindbladModel) -> Self {
        let d = model.dim();
        let (stat, dynamic): (Vec<_>, Vec<_>) = model.terms().iter().cloned().partition(HamTerm::is_static);
        let h = stat.iter().fold(SparseMatrix::zeros(d, d), |acc, t| acc.add(&t.op.scale(t.coefficient(0.0))));
        let jumps = model.jumps().iter().map(|j| j.op.clone()).collect();
        Self {
            dim: d,
            ground_dim: model.ground_dim(),
            basis: Basis::Z,
            blocks: vec![Block::new(Basis::Z, h, dynamic, jumps)],
        }
    }

    pub fn from_effective(model: &EffectiveModel) -> Self {
        Self::from_effective_models(&[model], model.basis()).expect("single model is consistent")
    }

    /// Several effective models acting together on a state held in `basis`.
    pub fn from_effective_models(models: &[&EffectiveModel], basis: Basis) -> Result<Self> {
        let d = models.first().map(|m| m.dim()).ok_or_else(|| Error::Numerical("no models".into()))?;
        let mut blocks = Vec::new();
        for m in models {
            if m.dim() != d {
                return Err(Error::Dimension { expected: d, got: m.dim() });
            }
            blocks.push(Block::new(m.basis(), m.hamiltonian(), vec![], m.aggregated_operators()));
        }
        Ok(Self { dim: d, ground_dim: d, basis, blocks })
    }

    pub fn dim(&self) -> usize {
        self.dim
    }
    /// Size of the leading ground-state block.
    pub fn ground_dim(&self) -> usize {
        self.ground_dim
    }
    pub fn basis(&self) -> Basis {
        self.basis
    }
    pub fn is_time_independent(&self) -> bool {
        self.blocks.iter().all(Block::is_static)
    }

    /// Same generator with the state held in the other basis.
    pub fn with_state_basis(mut self, basis: Basis) -> Result<Self> {
        if basis != self.basis && !self.dim.is_power_of_two() {
            return Err(Error::BasisMismatch { expected: self.basis, got: basis });
        }
        self.basis = basis;
        Ok(self)
    }

    /// `out = L_t(ρ)` for column-major ρ of size `dim × dim`.
    pub fn apply(&self, t: f64, rho: &[C64], out: &mut [C64]) {
        let d = self.dim;
        out.iter_mut().for_each(|x| *x = C64::default());
        for block in &self.blocks {
            if block.basis == self.basis {
                block.accumulate(t, rho, d, out);
            } else {
                let mut r = rho.to_vec();
                hadamard_conjugate(&mut r, d);
                let mut o = vec![C64::default(); d * d];
                block.accumulate(t, &r, d, &mut o);
                hadamard_conjugate(&mut o, d);
                out.iter_mut().zip(&o).for_each(|(a, b)| *a += b);
            }
        }
    }

    /// `out = L_t(ρ)` assuming ρ is Hermitian; about half the work of `apply`.
    pub fn apply_hermitian(&self, t: f64, rho: &[C64], out: &mut [C64]) {
        let d = self.dim;
        out.iter_mut().for_each(|x| *x = C64::default());
        let mut scratch = vec![C64::default(); d * d];
        for block in &self.blocks {
            if block.basis == self.basis {
                block.accumulate_hermitian(t, rho, d, out, &mut scratch);
            } else {
                let mut r = rho.to_vec();
                hadamard_conjugate(&mut r, d);
                let mut o = vec![C64::default(); d * d];
                block.accumulate_hermitian(t, &r, d, &mut o, &mut scratch);
                hadamard_conjugate(&mut o, d);
                out.iter_mut().zip(&o).for_each(|(a, b)| *a += b);
            }
        }
    }

    /// Superoperator matrix acting on column-major `vec(ρ)` at time `t`.
    pub fn superoperator(&self, t: f64) -> DMatrix<C64> {
        let n = self.dim * self.dim;
        let mut s = DMatrix::zeros(n, n);
        let mut e = vec![C64::default(); n];
        let mut col = vec![C64::default(); n];
        for c in 0..n {
            e[c] = C64::new(1.0, 0.0);
            self.apply(t, &e, &mut col);
            s.column_mut(c).copy_from_slice(&col);
            e[c] = C64::default();
        }
        s
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn superoperator_matches_kronecker_form() {
        let h = SparseMatrix::from_triplets(2, 2, [(0, 1, C64::new(0.3, 0.1)), (1, 0, C64::new(0.3, -0.1))]);
        let l = SparseMatrix::from_triplets(2, 2, [(0, 1, C64::new(0.5, 0.0))]);
        let gen = Liouvillian::from_parts(Basis::Z, h.clone(), vec![l.clone()]).unwrap();
        let s = gen.superoperator(0.0);
        let eye = DMatrix::<C64>::identity(2, 2);
        let hd = h.to_dense();
        let ld = l.to_dense();
        let ldl = ld.adjoint() * &ld;
        let expect = (eye.kronecker(&hd) - hd.transpose().kronecker(&eye)) * (-I) + ld.conjugate().kronecker(&ld)
            - (eye.kronecker(&ldl) + ldl.transpose().kronecker(&eye)) * C64::new(0.5, 0.0);
        assert!((s - expect).camax() < 1e-14);
    }

    #[test]
    fn hermitian_path_agrees() {
        let h = SparseMatrix::from_triplets(3, 3, [(0, 2, C64::new(0.2, 0.4)), (2, 0, C64::new(0.2, -0.4))]);
        let l = SparseMatrix::from_triplets(3, 3, [(1, 2, C64::new(0.7, 0.0)), (0, 1, C64::new(0.1, 0.2))]);
        let gen = Liouvillian::from_parts(Basis::Z, h, vec![l]).unwrap();
        let a = DMatrix::from_fn(3, 3, |i, j| C64::new((i + 2 * j) as f64, i as f64 - j as f64));
        let rho = &a * a.adjoint();
        let (mut x, mut y) = (vec![C64::default(); 9], vec![C64::default(); 9]);
        gen.apply(0.0, rho.as_slice(), &mut x);
        gen.apply_hermitian(0.0, rho.as_slice(), &mut y);
        assert!(x.iter().zip(&y).all(|(p, q)| (p - q).norm() < 1e-12));
    }
}
