//! Derivative-free search for drive parameters that minimize the time to
//! reach a target GHZ fidelity.
//!
//! The search runs Nelder–Mead in log space over the relative Z amplitudes,
//! the X amplitude and the two linewidths, with `Ω/γ` held fixed.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::analytic::WeakDriveParams;
use crate::drive::{DriveSchedule, Pumping};
use crate::dynamics::{time_to_fidelity, Evolution, IntegratorConfig};
use crate::effective::{build_effective_model, EffectiveOptions};
use crate::error::{invalid, Result};
use crate::full::build_full_model;
use crate::generator::Liouvillian;
use crate::par;
use crate::params::SystemParams;
use crate::register::{Basis, DensityMatrix};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum ModelKind {
    Effective,
    FullK1,
    FullK2,
}

/// Generator for a parameter set.
pub fn build_generator(params: &WeakDriveParams, kind: ModelKind, broadening: Option<f64>) -> Result<Liouvillian> {
    generator_for(&params.schedule()?, &params.system_params()?, kind, broadening)
}

/// Generator for an arbitrary schedule. `broadening` only affects the
/// effective model.
pub fn generator_for(
    schedule: &DriveSchedule,
    system: &SystemParams,
    kind: ModelKind,
    broadening: Option<f64>,
) -> Result<Liouvillian> {
    match kind {
        ModelKind::Effective => {
            let opts = EffectiveOptions { broadening, ..Default::default() };
            let z = build_effective_model(Pumping::Z, schedule, system, opts)?;
            let x = build_effective_model(Pumping::X, schedule, system, opts)?;
            Liouvillian::from_effective_models(&[&z, &x], Basis::Z)
        }
        ModelKind::FullK1 | ModelKind::FullK2 => {
            let k = if kind == ModelKind::FullK1 { 1 } else { 2 };
            Ok(Liouvillian::from_full(&build_full_model(system, schedule, k)?))
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct OptimizerConfig {
    pub max_iterations: usize,
    /// Jittered starts in addition to the seed itself.
    pub restarts: usize,
    /// Half-width of the uniform jitter on each log-parameter.
    pub jitter: f64,
    /// Initial simplex edge in log space.
    pub step: f64,
    pub seed: u64,
    pub target_fidelity: f64,
    pub model: ModelKind,
    pub broadening: Option<f64>,
    pub integrator: IntegratorConfig,
}

impl Default for OptimizerConfig {
    fn default() -> Self {
        Self {
            max_iterations: 500,
            restarts: 3,
            jitter: 0.1,
            step: 0.2,
            seed: 0,
            target_fidelity: 0.9,
            model: ModelKind::Effective,
            broadening: Some(crate::effective::DEFAULT_BROADENING),
            integrator: IntegratorConfig::default(),
        }
    }
}

impl OptimizerConfig {
    pub fn validate(&self) -> Result<()> {
        if !(self.target_fidelity > 0.0 && self.target_fidelity < 1.0) {
            return Err(invalid("target_fidelity", "must lie in (0, 1)"));
        }
        if !(self.step > 0.0) {
            return Err(invalid("step", "must be > 0"));
        }
        if !(self.jitter >= 0.0) {
            return Err(invalid("jitter", "must be >= 0"));
        }
        self.integrator.validate()
    }
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct OptimizeResult {
    pub params: WeakDriveParams,
    /// Time to target, `None` when no candidate reached it.
    pub time: Option<f64>,
    pub seed_time: Option<f64>,
    pub evaluations: usize,
}

fn encode(p: &WeakDriveParams) -> Vec<f64> {
    let mut x: Vec<f64> = p.a_z.iter().map(|a| a.ln()).collect();
    x.push(p.a_x.ln());
    x.push(p.gamma.ln());
    x.push(p.gamma_f.ln());
    x
}

fn decode(seed: &WeakDriveParams, x: &[f64]) -> WeakDriveParams {
    let m = seed.a_z.len();
    let mut p = seed.clone();
    p.a_z = x[..m].iter().map(|v| v.exp().min(1.0)).collect();
    p.a_x = x[m].exp().min(1.0);
    p.gamma = x[m + 1].exp();
    p.gamma_f = x[m + 2].exp();
    p
}

/// Time to the target fidelity for one parameter set.
pub fn preparation_time(params: &WeakDriveParams, cfg: &OptimizerConfig) -> Result<Option<f64>> {
    let gen = build_generator(params, cfg.model, cfg.broadening)?;
    let rho0 = DensityMatrix::maximally_mixed(1 << params.n_qubits, Basis::Z);
    time_to_fidelity(Evolution::Joint(&gen), &rho0, cfg.target_fidelity, &cfg.integrator)
}

/// Objective for the simplex: the time when reached, otherwise a penalty
/// above `t_max` so the search still has a slope to follow.
fn objective(seed: &WeakDriveParams, x: &[f64], cfg: &OptimizerConfig) -> f64 {
    let p = decode(seed, x);
    match preparation_time(&p, cfg) {
        Ok(Some(t)) => t,
        Ok(None) => cfg.integrator.t_max * 2.0 + penalty_shape(x),
        Err(_) => f64::INFINITY,
    }
}

// keeps unreachable regions ordered so the simplex drifts back toward the seed
fn penalty_shape(x: &[f64]) -> f64 {
    x.iter().map(|v| v.abs()).sum::<f64>() * 1e-3
}

struct Simplex {
    points: Vec<Vec<f64>>,
    values: Vec<f64>,
    evaluations: usize,
}

fn lexicographic(a: &[f64], b: &[f64]) -> std::cmp::Ordering {
    a.iter().zip(b).map(|(x, y)| x.total_cmp(y)).find(|o| o.is_ne()).unwrap_or(std::cmp::Ordering::Equal)
}

impl Simplex {
    fn sort(&mut self) {
        let mut idx: Vec<usize> = (0..self.points.len()).collect();
        idx.sort_by(|&i, &j| {
            self.values[i].total_cmp(&self.values[j]).then_with(|| lexicographic(&self.points[i], &self.points[j]))
        });
        self.points = idx.iter().map(|&i| self.points[i].clone()).collect();
        self.values = idx.iter().map(|&i| self.values[i]).collect();
    }
}

fn nelder_mead(f: &dyn Fn(&[f64]) -> f64, x0: &[f64], step: f64, max_iter: usize) -> (Vec<f64>, f64, usize) {
    let n = x0.len();
    let mut points = vec![x0.to_vec()];
    for i in 0..n {
        let mut p = x0.to_vec();
        p[i] += step;
        points.push(p);
    }
    let values = points.iter().map(|p| f(p)).collect();
    let mut s = Simplex { points, values, evaluations: n + 1 };
    for _ in 0..max_iter {
        s.sort();
        let best = s.values[0];
        let worst = s.values[n];
        if (worst - best).abs() <= 1e-4 * best.abs().max(1e-12) {
            break;
        }
        let centroid: Vec<f64> = (0..n).map(|k| s.points[..n].iter().map(|p| p[k]).sum::<f64>() / n as f64).collect();
        let along = |t: f64| -> Vec<f64> { (0..n).map(|k| centroid[k] + t * (s.points[n][k] - centroid[k])).collect() };
        let xr = along(-1.0);
        let fr = f(&xr);
        s.evaluations += 1;
        if fr < s.values[0] {
            let xe = along(-2.0);
            let fe = f(&xe);
            s.evaluations += 1;
            if fe < fr {
                s.points[n] = xe;
                s.values[n] = fe;
            } else {
                s.points[n] = xr;
                s.values[n] = fr;
            }
            continue;
        }
        if fr < s.values[n - 1] {
            s.points[n] = xr;
            s.values[n] = fr;
            continue;
        }
        let (xc, fc) = if fr < worst {
            let x = along(-0.5);
            let v = f(&x);
            (x, v)
        } else {
            let x = along(0.5);
            let v = f(&x);
            (x, v)
        };
        s.evaluations += 1;
        if fc < fr.min(worst) {
            s.points[n] = xc;
            s.values[n] = fc;
            continue;
        }
        // shrink toward the best vertex
        let best_point = s.points[0].clone();
        for i in 1..=n {
            let p: Vec<f64> = (0..n).map(|k| best_point[k] + 0.5 * (s.points[i][k] - best_point[k])).collect();
            s.values[i] = f(&p);
            s.points[i] = p;
            s.evaluations += 1;
        }
    }
    s.sort();
    (s.points[0].clone(), s.values[0], s.evaluations)
}

/// Minimize the preparation time starting from `seed`. Never returns a
/// worse time than the seed's.
pub fn numeric_time_minimizer(seed: &WeakDriveParams, cfg: &OptimizerConfig) -> Result<OptimizeResult> {
    cfg.validate()?;
    let seed_time = preparation_time(seed, cfg)?;
    let x0 = encode(seed);
    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
    let mut starts = vec![x0.clone()];
    for _ in 0..cfg.restarts {
        starts.push(x0.iter().map(|v| v + rng.random_range(-cfg.jitter..=cfg.jitter)).collect());
    }
    let runs = par::map(&starts, |start| {
        let f = |x: &[f64]| objective(seed, x, cfg);
        nelder_mead(&f, start, cfg.step, cfg.max_iterations)
    });
    let evaluations = runs.iter().map(|r| r.2).sum::<usize>() + 1;
    let seed_value = seed_time.unwrap_or(f64::INFINITY);
    let best = runs
        .into_iter()
        .filter(|r| r.1.is_finite())
        .min_by(|a, b| a.1.total_cmp(&b.1).then_with(|| lexicographic(&a.0, &b.0)));
    let (params, time) = match best {
        Some((x, v, _)) if v < seed_value && v <= cfg.integrator.t_max => (decode(seed, &x), Some(v)),
        _ => (seed.clone(), seed_time),
    };
    Ok(OptimizeResult { params, time, seed_time, evaluations })
}
