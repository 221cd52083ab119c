//! Time evolution of density matrices, observables along the way, steady
//! states and first-passage times to a target fidelity.

use nalgebra::{DMatrix, DVector};
use num_complex::Complex64 as C64;
use serde::{Deserialize, Serialize};

use crate::error::{invalid, Error, Result};
use crate::generator::Liouvillian;
use crate::ode::{Dopri5, OdeOptions};
use crate::register::{basis_change, ghz_state, Basis, DensityMatrix, GroundState, Sign};

/// Liouvillians up to this dimension may be stepped with a dense exponential.
pub const MAX_EXP_DIM: usize = 8;
/// Null-space solves by SVD up to this dimension, LU with a trace row above.
pub const MAX_SVD_DIM: usize = 16;
pub const MAX_DIRECT_DIM: usize = 64;
/// Relative singular value below which a direction counts as stationary.
pub const NULL_THRESHOLD: f64 = 1e-11;
/// Trace deviation above which a run is flagged as failed.
pub const TRACE_FAILURE: f64 = 1e-6;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Method {
    Rk45,
    Exponential,
    /// Exponential when the generator is static and small, else Rk45.
    Auto,
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct IntegratorConfig {
    pub method: Method,
    pub initial_step: f64,
    pub rtol: f64,
    pub atol: f64,
    pub t_max: f64,
    pub sample_interval: f64,
    /// Duration of one Z or X slice in alternating evolution.
    pub trotter_slice: f64,
    pub max_steps: usize,
}

impl Default for IntegratorConfig {
    fn default() -> Self {
        Self {
            method: Method::Auto,
            initial_step: 1e-2,
            rtol: 1e-8,
            atol: 1e-10,
            t_max: 1e4,
            sample_interval: 1e2,
            trotter_slice: 1.0,
            max_steps: 50_000_000,
        }
    }
}

impl IntegratorConfig {
    pub fn validate(&self) -> Result<()> {
        self.ode_options().validate()?;
        if !(self.t_max > 0.0 && self.t_max.is_finite()) {
            return Err(invalid("t_max", "must be finite and > 0"));
        }
        if !(self.sample_interval > 0.0) {
            return Err(invalid("sample_interval", "must be > 0"));
        }
        if !(self.trotter_slice > 0.0) {
            return Err(invalid("trotter_slice", "must be > 0"));
        }
        Ok(())
    }

    fn ode_options(&self) -> OdeOptions {
        OdeOptions {
            rtol: self.rtol,
            atol: self.atol,
            initial_step: self.initial_step,
            max_steps: self.max_steps,
            ..OdeOptions::default()
        }
    }

    fn sample_times(&self) -> Vec<f64> {
        let n = (self.t_max / self.sample_interval - 1e-9).ceil().max(1.0) as usize;
        (0..=n).map(|k| (k as f64 * self.sample_interval).min(self.t_max)).collect()
    }
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct SimTrace {
    pub times: Vec<f64>,
    pub fidelity: Vec<f64>,
    pub ghz_minus: Vec<f64>,
    /// Ground-state population per number of qubits in |1⟩.
    pub sectors: Vec<Vec<f64>>,
    pub trace_deviation: Vec<f64>,
    pub min_eigenvalue: Vec<f64>,
    pub failed: bool,
    #[serde(skip)]
    pub final_state: Option<DensityMatrix>,
}

impl SimTrace {
    fn new() -> Self {
        Self {
            times: vec![],
            fidelity: vec![],
            ghz_minus: vec![],
            sectors: vec![],
            trace_deviation: vec![],
            min_eigenvalue: vec![],
            failed: false,
            final_state: None,
        }
    }

    pub fn len(&self) -> usize {
        self.times.len()
    }
    pub fn is_empty(&self) -> bool {
        self.times.is_empty()
    }

    pub fn final_fidelity(&self) -> Option<f64> {
        self.fidelity.last().copied()
    }

    pub fn max_trace_deviation(&self) -> f64 {
        self.trace_deviation.iter().copied().fold(0.0, f64::max)
    }

    pub fn lowest_eigenvalue(&self) -> f64 {
        self.min_eigenvalue.iter().copied().fold(f64::INFINITY, f64::min)
    }

    /// Largest drop of fidelity between consecutive samples in the last half.
    pub fn tail_drop(&self) -> f64 {
        let start = self.len() / 2;
        self.fidelity[start..].windows(2).map(|w| w[0] - w[1]).fold(0.0, f64::max)
    }

    fn record(&mut self, t: f64, rho: &[C64], probe: &Probe) -> Result<()> {
        let obs = probe.observe(rho)?;
        if obs.trace_deviation > TRACE_FAILURE {
            self.failed = true;
        }
        self.times.push(t);
        self.fidelity.push(obs.fidelity);
        self.ghz_minus.push(obs.ghz_minus);
        self.sectors.push(obs.sectors);
        self.trace_deviation.push(obs.trace_deviation);
        self.min_eigenvalue.push(obs.min_eigenvalue);
        Ok(())
    }
}

struct Observation {
    fidelity: f64,
    ghz_minus: f64,
    sectors: Vec<f64>,
    trace_deviation: f64,
    min_eigenvalue: f64,
}

/// Ground-space observables of a state held in a given basis.
struct Probe {
    dim: usize,
    ground_dim: usize,
    basis: Basis,
    n_qubits: usize,
    plus: GroundState,
    minus: GroundState,
}

impl Probe {
    fn new(dim: usize, ground_dim: usize, basis: Basis) -> Result<Self> {
        if !ground_dim.is_power_of_two() || ground_dim < 2 {
            return Err(invalid("ground_dim", format!("{ground_dim} is not a qubit register")));
        }
        let n_qubits = ground_dim.trailing_zeros() as usize;
        Ok(Self {
            dim,
            ground_dim,
            basis,
            n_qubits,
            plus: ghz_state(n_qubits, Sign::Plus)?,
            minus: ghz_state(n_qubits, Sign::Minus)?,
        })
    }

    fn ground_z(&self, rho: &[C64]) -> Result<DensityMatrix> {
        let full = DensityMatrix::new(DMatrix::from_column_slice(self.dim, self.dim, rho), self.basis)?;
        let ground = full.leading_block(self.ground_dim)?;
        basis_change(&ground, Basis::Z)
    }

    fn fidelity(&self, rho: &[C64]) -> Result<f64> {
        crate::register::fidelity(&self.ground_z(rho)?, &self.plus)
    }

    fn observe(&self, rho: &[C64]) -> Result<Observation> {
        let g = self.ground_z(rho)?;
        let mut sectors = vec![0.0; self.n_qubits + 1];
        for (i, p) in g.populations().into_iter().enumerate() {
            sectors[i.count_ones() as usize] += p;
        }
        let trace: C64 = (0..self.dim).map(|i| rho[i * (self.dim + 1)]).sum();
        let full = DensityMatrix::new(DMatrix::from_column_slice(self.dim, self.dim, rho), self.basis)?;
        Ok(Observation {
            fidelity: crate::register::fidelity(&g, &self.plus)?,
            ghz_minus: crate::register::fidelity(&g, &self.minus)?,
            sectors,
            trace_deviation: (trace - 1.0).norm(),
            min_eigenvalue: full.min_eigenvalue(),
        })
    }
}

enum Propagator {
    Rk(Dopri5),
    Exp { cache: Option<(f64, DMatrix<C64>)> },
}

impl Propagator {
    fn new(gen: &Liouvillian, cfg: &IntegratorConfig) -> Result<Self> {
        let use_exp = match cfg.method {
            Method::Rk45 => false,
            Method::Exponential => {
                if !gen.is_time_independent() {
                    return Err(invalid("method", "exponential stepping needs a static generator"));
                }
                true
            }
            Method::Auto => gen.is_time_independent() && gen.dim() <= MAX_EXP_DIM,
        };
        Ok(if use_exp {
            Propagator::Exp { cache: None }
        } else {
            Propagator::Rk(Dopri5::new(cfg.ode_options(), gen.dim() * gen.dim())?)
        })
    }

    fn advance(&mut self, gen: &Liouvillian, t0: f64, t1: f64, rho: &mut [C64]) -> Result<()> {
        let dt = t1 - t0;
        if dt <= 0.0 {
            return Ok(());
        }
        match self {
            Propagator::Rk(ode) => ode.integrate(|t, y, dy| gen.apply_hermitian(t, y, dy), t0, t1, rho),
            Propagator::Exp { cache } => {
                let fresh = !matches!(cache, Some((h, _)) if (*h - dt).abs() <= 1e-14 * dt);
                if fresh {
                    let s = gen.superoperator(0.0);
                    // the exponential never returns on NaN input
                    if s.iter().any(|z| !(z.re.is_finite() && z.im.is_finite())) {
                        return Err(Error::Numerical("generator has non-finite entries".into()));
                    }
                    *cache = Some((dt, (s * C64::new(dt, 0.0)).exp()));
                }
                let (_, prop) = cache.as_ref().expect("filled above");
                let v = prop * DVector::from_column_slice(rho);
                rho.copy_from_slice(v.as_slice());
                Ok(())
            }
        }
    }
}

/// Bring `rho0` into the generator's frame: embed a ground-space state into
/// the enlarged space and change basis when needed.
pub fn prepare_state(gen: &Liouvillian, rho0: &DensityMatrix) -> Result<Vec<C64>> {
    let d = gen.dim();
    let g = gen.ground_dim();
    let rho = if rho0.basis() != gen.basis() { basis_change(rho0, gen.basis())? } else { rho0.clone() };
    if rho.dim() == d {
        return Ok(rho.into_matrix().as_slice().to_vec());
    }
    if rho.dim() != g {
        return Err(Error::Dimension { expected: d, got: rho.dim() });
    }
    let mut big = DMatrix::zeros(d, d);
    big.view_mut((0, 0), (g, g)).copy_from(rho.matrix());
    Ok(big.as_slice().to_vec())
}

fn symmetrize(rho: &mut [C64], d: usize) {
    for j in 0..d {
        for i in 0..=j {
            let a = rho[i + j * d];
            let b = rho[j + i * d];
            let m = (a + b.conj()) * 0.5;
            rho[i + j * d] = m;
            rho[j + i * d] = m.conj();
        }
    }
}

fn into_density(rho: Vec<C64>, d: usize, basis: Basis) -> Result<DensityMatrix> {
    DensityMatrix::new(DMatrix::from_vec(d, d, rho), basis)
}

/// Integrate the master equation and sample observables every
/// `sample_interval` up to `t_max`.
pub fn evolve(gen: &Liouvillian, rho0: &DensityMatrix, cfg: &IntegratorConfig) -> Result<SimTrace> {
    run(Evolution::Joint(gen), rho0, cfg)
}

/// Alternating evolution: one slice under the Z generator with the state in
/// the Z basis, then one slice under the X generator in the X basis.
///
/// Each sample interval is split into a whole number of slice pairs no
/// longer than `trotter_slice`.
pub fn trotter_evolve(
    z_gen: &Liouvillian,
    x_gen: &Liouvillian,
    rho0: &DensityMatrix,
    cfg: &IntegratorConfig,
) -> Result<SimTrace> {
    run(Evolution::Alternating { z: z_gen, x: x_gen }, rho0, cfg)
}

pub fn run(evo: Evolution<'_>, rho0: &DensityMatrix, cfg: &IntegratorConfig) -> Result<SimTrace> {
    cfg.validate()?;
    let d = evo.dim();
    let mut runner = Runner::new(evo, cfg)?;
    let mut rho = runner.prepare(rho0)?;
    let mut trace = SimTrace::new();
    trace.record(0.0, &rho, &runner.probe)?;
    for w in cfg.sample_times().windows(2) {
        runner.advance(w[0], w[1], &mut rho)?;
        symmetrize(&mut rho, d);
        trace.record(w[1], &rho, &runner.probe)?;
    }
    trace.final_state = Some(into_density(rho, d, runner.gens[0].basis())?);
    Ok(trace)
}

fn hadamard_in_place(rho: &mut [C64], d: usize) -> Result<()> {
    if !d.is_power_of_two() {
        return Err(invalid("dim", "basis change needs a qubit register"));
    }
    crate::register::hadamard_conjugate(rho, d);
    Ok(())
}

/// Hermitian, trace-one representatives of the stationary states.
///
/// One entry for a unique steady state. A degenerate null space yields one
/// Hermitian matrix per null direction; those are normalized when their
/// trace is nonzero and left traceless otherwise.
pub fn steady_states(gen: &Liouvillian) -> Result<Vec<DensityMatrix>> {
    let d = gen.dim();
    if d > MAX_DIRECT_DIM {
        return Err(invalid("dim", format!("{d} exceeds the direct solver limit {MAX_DIRECT_DIM}")));
    }
    let s = gen.superoperator(0.0);
    if d > MAX_SVD_DIM {
        return Ok(vec![steady_by_lu(s, d, gen.basis())?]);
    }
    let svd = s.svd(false, true);
    let top = svd.singular_values.max().max(f64::MIN_POSITIVE);
    let v_t = svd.v_t.ok_or_else(|| Error::Numerical("svd without V".into()))?;
    let null: Vec<usize> = (0..d * d).filter(|&i| svd.singular_values[i] <= NULL_THRESHOLD * top).collect();
    if null.is_empty() {
        return Err(Error::Numerical("generator has no stationary state".into()));
    }
    let mut out = Vec::new();
    for &k in &null {
        let v: Vec<C64> = v_t.row(k).iter().map(|z| z.conj()).collect();
        let m = DMatrix::from_vec(d, d, v);
        // a null vector's Hermitian and anti-Hermitian parts are both stationary
        let herm = (&m + m.adjoint()) * C64::new(0.5, 0.0);
        let anti = (&m - m.adjoint()) * C64::new(0.0, -0.5);
        let pick = if herm.camax() >= anti.camax() { herm } else { anti };
        let tr = pick.trace();
        let scale = if tr.norm() > 1e-8 { tr } else { C64::new(pick.camax(), 0.0) };
        let pick = pick / scale;
        out.push(DensityMatrix::new(pick, gen.basis())?);
    }
    Ok(out)
}

fn steady_by_lu(mut s: DMatrix<C64>, d: usize, basis: Basis) -> Result<DensityMatrix> {
    // replace the first equation by Tr ρ = 1
    let n = d * d;
    let mut rhs = DVector::zeros(n);
    for c in 0..n {
        s[(0, c)] = C64::default();
    }
    for i in 0..d {
        s[(0, i * (d + 1))] = C64::new(1.0, 0.0);
    }
    rhs[0] = C64::new(1.0, 0.0);
    let x = s.lu().solve(&rhs).ok_or(Error::Degenerate { dim: 0 })?;
    let m = DMatrix::from_vec(d, d, x.as_slice().to_vec());
    let mut rho = DensityMatrix::new(m, basis)?;
    rho.symmetrize();
    Ok(rho)
}

/// Unique steady state, or `Degenerate` with the null-space dimension.
pub fn steady_state(gen: &Liouvillian) -> Result<DensityMatrix> {
    let mut all = steady_states(gen)?;
    if all.len() != 1 {
        return Err(Error::Degenerate { dim: all.len() });
    }
    Ok(all.remove(0))
}

/// Steady state by integrating until `Σ|ρ(t+τ) − ρ(t)| ≤ tol`, for
/// generators too large for a direct solve.
pub fn steady_state_by_integration(
    gen: &Liouvillian,
    rho0: &DensityMatrix,
    cfg: &IntegratorConfig,
    tol: f64,
) -> Result<DensityMatrix> {
    cfg.validate()?;
    let d = gen.dim();
    let mut rho = prepare_state(gen, rho0)?;
    let mut prop = Propagator::new(gen, cfg)?;
    let mut t = 0.0;
    while t < cfg.t_max {
        let prev = rho.clone();
        prop.advance(gen, t, t + cfg.sample_interval, &mut rho)?;
        symmetrize(&mut rho, d);
        t += cfg.sample_interval;
        let change: f64 = rho.iter().zip(&prev).map(|(a, b)| (a - b).norm()).sum();
        if change <= tol {
            return into_density(rho, d, gen.basis());
        }
    }
    Err(Error::Numerical(format!("no convergence to {tol} by t = {}", cfg.t_max)))
}

/// ‖L(ρ)‖ as the largest entry.
pub fn residual(gen: &Liouvillian, rho: &DensityMatrix) -> Result<f64> {
    let r = prepare_state(gen, rho)?;
    let mut out = vec![C64::default(); r.len()];
    gen.apply(0.0, &r, &mut out);
    Ok(out.iter().map(|z| z.norm()).fold(0.0, f64::max))
}

/// How the dynamics is split between pumping configurations.
#[derive(Clone, Copy)]
pub enum Evolution<'a> {
    Joint(&'a Liouvillian),
    Alternating { z: &'a Liouvillian, x: &'a Liouvillian },
}

impl Evolution<'_> {
    fn dim(&self) -> usize {
        match self {
            Evolution::Joint(g) => g.dim(),
            Evolution::Alternating { z, .. } => z.dim(),
        }
    }
}

/// First time the GHZ fidelity reaches `target`, refined by bisection to a
/// relative precision of `1e-3`. `None` if not reached by `t_max`.
pub fn time_to_fidelity(
    evo: Evolution<'_>,
    rho0: &DensityMatrix,
    target: f64,
    cfg: &IntegratorConfig,
) -> Result<Option<f64>> {
    if !(target > 0.0 && target < 1.0) {
        return Err(invalid("target_fidelity", "must lie in (0, 1)"));
    }
    cfg.validate()?;
    let d = evo.dim();
    let mut runner = Runner::new(evo, cfg)?;
    let mut rho = runner.prepare(rho0)?;
    if runner.fidelity(&rho)? >= target {
        return Ok(Some(0.0));
    }
    let times = cfg.sample_times();
    for w in times.windows(2) {
        let before = rho.clone();
        runner.advance(w[0], w[1], &mut rho)?;
        symmetrize(&mut rho, d);
        if runner.fidelity(&rho)? >= target {
            let (mut lo, mut hi) = (w[0], w[1]);
            while hi - lo > 1e-3 * hi {
                let mid = 0.5 * (lo + hi);
                let mut probe = before.clone();
                let mut fresh = Runner::new(evo, cfg)?;
                fresh.advance(w[0], mid, &mut probe)?;
                if fresh.fidelity(&probe)? >= target {
                    hi = mid;
                } else {
                    lo = mid;
                }
            }
            return Ok(Some(hi));
        }
    }
    Ok(None)
}

/// Propagation for either evolution kind, state kept in the Z basis for
/// alternating runs.
struct Runner<'a> {
    evo: Evolution<'a>,
    gens: Vec<Liouvillian>,
    props: Vec<Propagator>,
    probe: Probe,
    slice: f64,
}

impl<'a> Runner<'a> {
    fn new(evo: Evolution<'a>, cfg: &IntegratorConfig) -> Result<Self> {
        let gens = match evo {
            Evolution::Joint(g) => vec![g.clone()],
            Evolution::Alternating { z, x } => {
                if z.dim() != x.dim() {
                    return Err(Error::Dimension { expected: z.dim(), got: x.dim() });
                }
                vec![z.clone().with_state_basis(Basis::Z)?, x.clone().with_state_basis(Basis::X)?]
            }
        };
        let props = gens.iter().map(|g| Propagator::new(g, cfg)).collect::<Result<_>>()?;
        let probe = Probe::new(gens[0].dim(), gens[0].ground_dim(), gens[0].basis())?;
        Ok(Self { evo, gens, props, probe, slice: cfg.trotter_slice })
    }

    fn prepare(&self, rho0: &DensityMatrix) -> Result<Vec<C64>> {
        prepare_state(&self.gens[0], rho0)
    }

    fn fidelity(&self, rho: &[C64]) -> Result<f64> {
        self.probe.fidelity(rho)
    }

    fn advance(&mut self, t0: f64, t1: f64, rho: &mut [C64]) -> Result<()> {
        match self.evo {
            Evolution::Joint(_) => self.props[0].advance(&self.gens[0], t0, t1, rho),
            Evolution::Alternating { .. } => {
                let d = self.gens[0].dim();
                let span = t1 - t0;
                if span <= 0.0 {
                    return Ok(());
                }
                let pairs = (span / self.slice - 1e-9).ceil().max(1.0) as usize;
                let slice = span / pairs as f64;
                let (zg, xg) = (&self.gens[0], &self.gens[1]);
                let (zp, xp) = self.props.split_at_mut(1);
                for k in 0..pairs {
                    let t = t0 + k as f64 * slice;
                    zp[0].advance(zg, t, t + slice, rho)?;
                    hadamard_in_place(rho, d)?;
                    xp[0].advance(xg, t, t + slice, rho)?;
                    hadamard_in_place(rho, d)?;
                }
                Ok(())
            }
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::sparse::SparseMatrix;

    #[test]
    fn sample_grid_ends_at_t_max() {
        let cfg = IntegratorConfig { t_max: 2.5, sample_interval: 1.0, ..Default::default() };
        assert_eq!(cfg.sample_times(), vec![0.0, 1.0, 2.0, 2.5]);
    }

    #[test]
    fn qubit_decay_steady_state() {
        let l = SparseMatrix::from_triplets(2, 2, [(0, 1, C64::new(0.3, 0.0))]);
        let gen = Liouvillian::from_parts(Basis::Z, SparseMatrix::zeros(2, 2), vec![l]).unwrap();
        let rho = steady_state(&gen).unwrap();
        assert!((rho.matrix()[(0, 0)].re - 1.0).abs() < 1e-12);
    }
}
