//! Atom–oscillator Lindblad model truncated by total excitation number.
//!
//! Each atom has ground levels 0, 1 and excited levels e (Z transition) and
//! f (X transition). Oscillator b couples to e, oscillator c to f. The frame
//! rotates at the common excited/oscillator frequency, so the interaction is
//! static and every drive tone keeps an explicit `exp(iΔt)` phase.

use num_complex::Complex64 as C64;
use std::collections::HashMap;
use std::f64::consts::FRAC_1_SQRT_2;

use crate::drive::{DriveSchedule, DriveTone, Pumping};
use crate::error::{invalid, Result};
use crate::params::SystemParams;
use crate::sparse::SparseMatrix;

/// Upper limit on the register size for the enlarged space.
pub const MAX_FULL_QUBITS: usize = 8;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Level {
    Zero = 0,
    One = 1,
    E = 2,
    F = 3,
}

impl Level {
    fn from_code(c: u32) -> Level {
        match c & 3 {
            0 => Level::Zero,
            1 => Level::One,
            2 => Level::E,
            _ => Level::F,
        }
    }
}

/// Basis state: packed atom levels (2 bits each) plus oscillator quanta.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub struct SpaceState {
    atoms: u32,
    b: u8,
    c: u8,
}

impl SpaceState {
    pub fn ground(bits: usize, n: usize) -> Self {
        let mut atoms = 0u32;
        for a in 0..n {
            if bits >> a & 1 == 1 {
                atoms |= 1 << (2 * a);
            }
        }
        Self { atoms, b: 0, c: 0 }
    }

    pub fn new(levels: &[Level], b: u8, c: u8) -> Self {
        let atoms = levels.iter().enumerate().fold(0u32, |acc, (a, l)| acc | (*l as u32) << (2 * a));
        Self { atoms, b, c }
    }

    pub fn level(&self, atom: usize) -> Level {
        Level::from_code(self.atoms >> (2 * atom))
    }

    fn with_level(mut self, atom: usize, l: Level) -> Self {
        self.atoms &= !(3 << (2 * atom));
        self.atoms |= (l as u32) << (2 * atom);
        self
    }

    pub fn oscillators(&self) -> (u8, u8) {
        (self.b, self.c)
    }

    pub fn excitations(&self, n: usize) -> usize {
        let atomic = (0..n).filter(|&a| matches!(self.level(a), Level::E | Level::F)).count();
        atomic + self.b as usize + self.c as usize
    }
}

/// Enumerated basis with at most `k` excitations. The first `2^N` states
/// are the ground manifold in bitstring order, so the ground block of a
/// density matrix is its leading `2^N × 2^N` block.
#[derive(Clone, Debug)]
pub struct TruncatedSpace {
    n_qubits: usize,
    max_excitations: usize,
    states: Vec<SpaceState>,
    lookup: HashMap<SpaceState, usize>,
}

impl TruncatedSpace {
    pub fn new(n_qubits: usize, max_excitations: usize) -> Result<Self> {
        if !(1..=MAX_FULL_QUBITS).contains(&n_qubits) {
            return Err(invalid("n_qubits", format!("enlarged space needs 1..={MAX_FULL_QUBITS}")));
        }
        if !(1..=2).contains(&max_excitations) {
            return Err(invalid("truncation", format!("k must be 1 or 2, got {max_excitations}")));
        }
        let n = n_qubits;
        let mut states: Vec<SpaceState> = (0..1usize << n).map(|i| SpaceState::ground(i, n)).collect();
        let mut excited = Vec::new();
        for atoms in 0..(1u32 << (2 * n)) {
            for b in 0..=max_excitations as u8 {
                for c in 0..=max_excitations as u8 {
                    let s = SpaceState { atoms, b, c };
                    let x = s.excitations(n);
                    if x >= 1 && x <= max_excitations {
                        excited.push((x, s));
                    }
                }
            }
        }
        excited.sort_by_key(|&(x, s)| (x, s.atoms, s.b, s.c));
        states.extend(excited.into_iter().map(|(_, s)| s));
        let lookup = states.iter().enumerate().map(|(i, s)| (*s, i)).collect();
        Ok(Self { n_qubits, max_excitations, states, lookup })
    }

    pub fn n_qubits(&self) -> usize {
        self.n_qubits
    }
    pub fn max_excitations(&self) -> usize {
        self.max_excitations
    }
    pub fn dim(&self) -> usize {
        self.states.len()
    }
    pub fn ground_dim(&self) -> usize {
        1 << self.n_qubits
    }
    pub fn states(&self) -> &[SpaceState] {
        &self.states
    }
    pub fn index_of(&self, s: &SpaceState) -> Option<usize> {
        self.lookup.get(s).copied()
    }

    /// Collect `(target, source, amplitude)` for a local map applied to every state.
    fn build<F>(&self, mut local: F) -> SparseMatrix
    where
        F: FnMut(&SpaceState, &mut Vec<(SpaceState, C64)>),
    {
        let mut triplets = Vec::new();
        let mut buf = Vec::new();
        for (j, s) in self.states.iter().enumerate() {
            buf.clear();
            local(s, &mut buf);
            for (t, amp) in buf.drain(..) {
                if let Some(&i) = self.lookup.get(&t) {
                    triplets.push((i, j, amp));
                }
            }
        }
        SparseMatrix::from_triplets(self.dim(), self.dim(), triplets)
    }
}

fn re(x: f64) -> C64 {
    C64::new(x, 0.0)
}

/// `op · Σ_k a_k exp(iω_k t)`.
#[derive(Clone, Debug)]
pub struct HamTerm {
    pub op: SparseMatrix,
    pub coeffs: Vec<(C64, f64)>,
}

impl HamTerm {
    pub fn constant(op: SparseMatrix) -> Self {
        Self { op, coeffs: vec![(re(1.0), 0.0)] }
    }

    pub fn coefficient(&self, t: f64) -> C64 {
        self.coeffs.iter().map(|&(a, w)| a * C64::from_polar(1.0, w * t)).sum()
    }

    pub fn is_static(&self) -> bool {
        self.coeffs.iter().all(|&(_, w)| w == 0.0)
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum JumpLabel {
    /// Spontaneous decay of `atom` from an excited level to a ground level.
    Atomic {
        atom: usize,
        from: Level,
        to: Level,
    },
    OscillatorB,
    OscillatorC,
}

#[derive(Clone, Debug)]
pub struct Jump {
    pub label: JumpLabel,
    pub op: SparseMatrix,
}

/// Hamiltonian as a sum of phase-carrying terms plus jump operators.
#[derive(Clone, Debug)]
pub struct LindbladModel {
    dim: usize,
    ground_dim: usize,
    n_qubits: usize,
    terms: Vec<HamTerm>,
    jumps: Vec<Jump>,
}

impl LindbladModel {
    pub fn new(space: &TruncatedSpace, terms: Vec<HamTerm>, jumps: Vec<Jump>) -> Self {
        Self { dim: space.dim(), ground_dim: space.ground_dim(), n_qubits: space.n_qubits(), terms, jumps }
    }

    pub fn dim(&self) -> usize {
        self.dim
    }
    pub fn ground_dim(&self) -> usize {
        self.ground_dim
    }
    pub fn n_qubits(&self) -> usize {
        self.n_qubits
    }
    pub fn terms(&self) -> &[HamTerm] {
        &self.terms
    }
    pub fn jumps(&self) -> &[Jump] {
        &self.jumps
    }

    pub fn hamiltonian_at(&self, t: f64) -> SparseMatrix {
        self.terms
            .iter()
            .fold(SparseMatrix::zeros(self.dim, self.dim), |acc, term| acc.add(&term.op.scale(term.coefficient(t))))
    }

    pub fn is_time_independent(&self) -> bool {
        self.terms.iter().all(HamTerm::is_static)
    }
}

/// `g(b†J_{1e} + h.c.)` for Z, `g(c†J_{−f} + h.c.)` for X.
pub fn build_interaction(pumping: Pumping, params: &SystemParams, space: &TruncatedSpace) -> SparseMatrix {
    let g = params.g();
    let n = space.n_qubits();
    let lowering = space.build(|s, out| {
        for a in 0..n {
            match (pumping, s.level(a)) {
                (Pumping::Z, Level::E) => {
                    let mut t = s.with_level(a, Level::One);
                    t.b += 1;
                    out.push((t, re(g * (t.b as f64).sqrt())));
                }
                (Pumping::X, Level::F) => {
                    let amp = g * ((s.c + 1) as f64).sqrt() * FRAC_1_SQRT_2;
                    let mut t0 = s.with_level(a, Level::Zero);
                    t0.c += 1;
                    out.push((t0, re(amp)));
                    let mut t1 = s.with_level(a, Level::One);
                    t1.c += 1;
                    out.push((t1, re(-amp)));
                }
                _ => {}
            }
        }
    });
    lowering.add(&lowering.adjoint())
}

/// Collective raising operator `J_{e1}` (Z) or `J_{f−}` (X), unit amplitude.
pub fn raising_operator(pumping: Pumping, space: &TruncatedSpace) -> SparseMatrix {
    let n = space.n_qubits();
    let k = space.max_excitations();
    space.build(|s, out| {
        if s.excitations(n) >= k {
            return;
        }
        for a in 0..n {
            match (pumping, s.level(a)) {
                (Pumping::Z, Level::One) => out.push((s.with_level(a, Level::E), re(1.0))),
                (Pumping::X, Level::Zero) => out.push((s.with_level(a, Level::F), re(FRAC_1_SQRT_2))),
                (Pumping::X, Level::One) => out.push((s.with_level(a, Level::F), re(-FRAC_1_SQRT_2))),
                _ => {}
            }
        }
    })
}

/// `(Ω/2)e^{iΔt}·J_raise + h.c.` as two phase-carrying terms.
pub fn build_drive(tone: &DriveTone, space: &TruncatedSpace) -> [HamTerm; 2] {
    let up = raising_operator(tone.pumping(), space);
    let down = up.adjoint();
    let half = re(tone.rabi() / 2.0);
    [
        HamTerm { op: up, coeffs: vec![(half, tone.detuning())] },
        HamTerm { op: down, coeffs: vec![(half, -tone.detuning())] },
    ]
}

/// Per-atom spontaneous decay plus oscillator loss, always `4N + 2` entries.
pub fn build_jumps(params: &SystemParams, space: &TruncatedSpace) -> Vec<Jump> {
    let n = space.n_qubits();
    let mut jumps = Vec::with_capacity(4 * n + 2);
    let channels = [
        (Level::E, Level::Zero, params.gamma_0e()),
        (Level::E, Level::One, params.gamma_1e()),
        (Level::F, Level::Zero, params.gamma_0f()),
        (Level::F, Level::One, params.gamma_1f()),
    ];
    for a in 0..n {
        for &(from, to, rate) in &channels {
            let amp = rate.sqrt();
            let op = space.build(|s, out| {
                if s.level(a) == from {
                    out.push((s.with_level(a, to), re(amp)));
                }
            });
            jumps.push(Jump { label: JumpLabel::Atomic { atom: a, from, to }, op });
        }
    }
    let kb = params.kappa_b().sqrt();
    let kc = params.kappa_c().sqrt();
    let b_op = space.build(|s, out| {
        if s.b > 0 {
            let mut t = *s;
            t.b -= 1;
            out.push((t, re(kb * (s.b as f64).sqrt())));
        }
    });
    let c_op = space.build(|s, out| {
        if s.c > 0 {
            let mut t = *s;
            t.c -= 1;
            out.push((t, re(kc * (s.c as f64).sqrt())));
        }
    });
    jumps.push(Jump { label: JumpLabel::OscillatorB, op: b_op });
    jumps.push(Jump { label: JumpLabel::OscillatorC, op: c_op });
    jumps
}

/// Both configurations with every tone of the schedule. Tones sharing a
/// raising operator are merged into one term with several phases.
pub fn build_full_model(
    params: &SystemParams,
    schedule: &DriveSchedule,
    max_excitations: usize,
) -> Result<LindbladModel> {
    if schedule.n_qubits() != params.n_qubits() {
        return Err(invalid("schedule", "qubit count differs from system parameters"));
    }
    let space = TruncatedSpace::new(params.n_qubits(), max_excitations)?;
    let mut terms = vec![HamTerm::constant(build_interaction(Pumping::Z, params, &space).add(&build_interaction(
        Pumping::X,
        params,
        &space,
    )))];
    for pumping in [Pumping::Z, Pumping::X] {
        let tones = schedule.tones(pumping);
        if tones.is_empty() {
            continue;
        }
        let up = raising_operator(pumping, &space);
        let down = up.adjoint();
        let c_up = tones.iter().map(|t| (re(t.rabi() / 2.0), t.detuning())).collect();
        let c_down = tones.iter().map(|t| (re(t.rabi() / 2.0), -t.detuning())).collect();
        terms.push(HamTerm { op: up, coeffs: c_up });
        terms.push(HamTerm { op: down, coeffs: c_down });
    }
    Ok(LindbladModel::new(&space, terms, build_jumps(params, &space)))
}
