//! The five subcommands.

use std::path::Path;

use ghz_core::analytic::{
    strong_coefficients, strong_drive_params, weak_drive_params, weak_time_bound, StrongDriveParams, WeakDriveParams,
};
use ghz_core::compartment::{
    b_factor, build_3compartment_strong, build_4compartment, kappa_factor, mixed_populations_4, strong_rate_bundle,
    strong_rate_ratio, weak_rate_bundle, CompartmentModel,
};
use ghz_core::drive::{DriveSchedule, Pumping};
use ghz_core::dynamics::{evolve, run, steady_state, time_to_fidelity, Evolution, SimTrace, MAX_DIRECT_DIM};
use ghz_core::effective::{build_effective_model, EffectiveOptions};
use ghz_core::generator::Liouvillian;
use ghz_core::optimize::{generator_for, numeric_time_minimizer, OptimizeResult};
use ghz_core::par;
use ghz_core::params::SystemParams;
use ghz_core::register::{fidelity, ghz_state, Basis, DensityMatrix, Sign};
use serde::Serialize;

use crate::config::{DriveSource, Kind, RunConfig, Split};
use crate::error::CliError;
use crate::output::{num, opt, write_json, Table};

/// Drive and system parameters for one register size.
struct Drive {
    schedule: DriveSchedule,
    system: SystemParams,
    strong: bool,
    optimized: Option<OptimizeResult>,
}

#[derive(Serialize)]
struct DriveSummary {
    source: DriveSource,
    gamma_e: f64,
    gamma_f: f64,
    z_rabi: Vec<f64>,
    x_rabi: Vec<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    optimizer: Option<OptimizerSummary>,
}

#[derive(Serialize)]
struct OptimizerSummary {
    seed_time: Option<f64>,
    time: Option<f64>,
    evaluations: usize,
}

impl Drive {
    fn summary(&self, source: DriveSource) -> DriveSummary {
        DriveSummary {
            source,
            gamma_e: self.system.gamma_e(),
            gamma_f: self.system.gamma_f(),
            z_rabi: self.schedule.z_amplitudes().to_vec(),
            x_rabi: self.schedule.x_amplitudes().to_vec(),
            optimizer: self.optimized.as_ref().map(|r| OptimizerSummary {
                seed_time: r.seed_time,
                time: r.time,
                evaluations: r.evaluations,
            }),
        }
    }
}

fn config_err(key: &str) -> impl Fn(ghz_core::Error) -> CliError + '_ {
    move |e| CliError::Config { key: key.to_string(), reason: e.to_string() }
}

fn weak_seed(cfg: &RunConfig, n: usize) -> Result<WeakDriveParams, CliError> {
    let mut w = weak_drive_params(n, cfg.drive.error, cfg.drive.alpha).map_err(config_err("drive"))?;
    if let Some(g) = cfg.system.gamma_e {
        w = w.with_gamma(g);
    }
    if let Some(g) = cfg.system.gamma_f {
        w.gamma_f = g;
    }
    Ok(w)
}

fn strong_seed(cfg: &RunConfig, n: usize) -> Result<StrongDriveParams, CliError> {
    let mut p = strong_drive_params(n, cfg.drive.error).map_err(config_err("drive"))?;
    if let Some(g) = cfg.system.gamma_e {
        p.gamma = g;
    }
    if let Some(g) = cfg.system.gamma_f {
        p.gamma_f = g;
    }
    Ok(p)
}

fn with_losses(cfg: &RunConfig, p: SystemParams) -> Result<SystemParams, CliError> {
    p.with_oscillator_loss(cfg.system.kappa_b, cfg.system.kappa_c).map_err(config_err("system"))
}

fn resolve(cfg: &RunConfig, n: usize) -> Result<Drive, CliError> {
    match cfg.drive.source {
        DriveSource::AnalyticWeak => {
            let w = weak_seed(cfg, n)?;
            Ok(Drive {
                schedule: w.schedule().map_err(config_err("drive"))?,
                system: with_losses(cfg, w.system_params().map_err(config_err("system"))?)?,
                strong: false,
                optimized: None,
            })
        }
        DriveSource::Optimize => {
            let w = weak_seed(cfg, n)?;
            let r = numeric_time_minimizer(&w, &cfg.optimizer_config())?;
            Ok(Drive {
                schedule: r.params.schedule()?,
                system: r.params.system_params()?,
                strong: false,
                optimized: Some(r),
            })
        }
        DriveSource::AnalyticStrong => {
            let p = strong_seed(cfg, n)?;
            Ok(Drive {
                schedule: p.schedule().map_err(config_err("drive"))?,
                system: with_losses(cfg, p.system_params().map_err(config_err("system"))?)?,
                strong: true,
                optimized: None,
            })
        }
        DriveSource::Explicit => {
            let z = cfg.drive.z_rabi.clone().unwrap_or_default();
            let x = cfg.drive.x_rabi.clone().unwrap_or_default();
            let schedule = DriveSchedule::new(n, 1.0, z, x).map_err(config_err("drive.z_rabi"))?;
            let ge = cfg.system.gamma_e.unwrap_or_default();
            let gf = cfg.system.gamma_f.unwrap_or(ge);
            let system = SystemParams::symmetric(n, ge, gf).map_err(config_err("system.gamma_e"))?;
            Ok(Drive { schedule, system: with_losses(cfg, system)?, strong: false, optimized: None })
        }
    }
}

fn compartment_model(cfg: &RunConfig, n: usize, d: &Drive, zero_loss: bool) -> Result<CompartmentModel, CliError> {
    let model = if d.strong {
        let eta = cfg.model.broadening().unwrap_or(ghz_core::effective::DEFAULT_BROADENING);
        let mut b = strong_rate_bundle(&d.schedule, &d.system, eta)?;
        if zero_loss {
            b = b.without_loss();
        }
        build_3compartment_strong(b)?
    } else {
        let mut b = weak_rate_bundle(&d.schedule, &d.system, cfg.model.broadening())?;
        if zero_loss {
            b = b.without_loss();
        }
        build_4compartment(n, b)?
    };
    Ok(model)
}

fn mixed_compartments(model: &CompartmentModel, n: usize) -> Vec<f64> {
    if model.len() == 4 {
        mixed_populations_4(n)
    } else {
        let pair = 0.5f64.powi(n as i32);
        vec![1.0 - 2.0 * pair, pair, pair]
    }
}

fn split_generators(d: &Drive, broadening: Option<f64>) -> Result<(Liouvillian, Liouvillian), CliError> {
    let opts = EffectiveOptions { broadening, ..Default::default() };
    let z = build_effective_model(Pumping::Z, &d.schedule, &d.system, opts)?;
    let x = build_effective_model(Pumping::X, &d.schedule, &d.system, opts)?;
    Ok((Liouvillian::from_effective(&z), Liouvillian::from_effective(&x)))
}

fn mixed(n: usize) -> DensityMatrix {
    DensityMatrix::maximally_mixed(1 << n, Basis::Z)
}

/// First sample at or above `target`, linearly interpolated.
fn sampled_crossing(times: &[f64], values: &[f64], target: f64) -> Option<f64> {
    let k = values.iter().position(|&v| v >= target)?;
    if k == 0 {
        return Some(times[0]);
    }
    let (t0, t1, v0, v1) = (times[k - 1], times[k], values[k - 1], values[k]);
    Some(t0 + (target - v0) / (v1 - v0) * (t1 - t0))
}

#[derive(Serialize)]
struct SimulateSummary {
    n_qubits: usize,
    model: &'static str,
    split: Split,
    samples: usize,
    final_fidelity: Option<f64>,
    target_fidelity: f64,
    /// Interpolated between samples.
    time_to_target: Option<f64>,
    steady_error: Option<f64>,
    max_trace_deviation: f64,
    lowest_eigenvalue: f64,
    failed: bool,
    drive: DriveSummary,
}

pub fn simulate(cfg: &RunConfig, out: &Path, hash: &str) -> Result<Vec<String>, CliError> {
    let n = cfg.n_qubits;
    let d = resolve(cfg, n)?;
    let icfg = cfg.integrator.to_core();
    let (table, summary) = match cfg.model.kind.quantum() {
        None => {
            let model = compartment_model(cfg, n, &d, false)?;
            let p0 = mixed_compartments(&model, n);
            let times: Vec<f64> = {
                let steps = (icfg.t_max / icfg.sample_interval - 1e-9).ceil().max(1.0) as usize;
                (0..=steps).map(|k| (k as f64 * icfg.sample_interval).min(icfg.t_max)).collect()
            };
            let mut header = vec!["t".to_string(), "fidelity".into(), "ghz_minus".into()];
            let others: Vec<usize> = (0..model.worst()).collect();
            header.extend(others.iter().map(|&i| model.labels()[i].to_string()));
            header.push("trace_deviation".into());
            let mut table = Table::new(header);
            let mut fid = Vec::with_capacity(times.len());
            let mut dev = 0.0f64;
            for &t in &times {
                let p = model.evolve(t, &p0)?;
                let total: f64 = p.iter().sum();
                dev = dev.max((total - 1.0).abs());
                fid.push(p[model.target()]);
                let mut row = vec![num(t), num(p[model.target()]), num(p[model.worst()])];
                row.extend(others.iter().map(|&i| num(p[i])));
                row.push(num((total - 1.0).abs()));
                table.push(row);
            }
            let summary = SimulateSummary {
                n_qubits: n,
                model: cfg.model.kind.name(),
                split: cfg.model.split,
                samples: times.len(),
                final_fidelity: fid.last().copied(),
                target_fidelity: cfg.target_fidelity,
                time_to_target: sampled_crossing(&times, &fid, cfg.target_fidelity),
                steady_error: model.stationary_error().ok().map(|e| e.exact),
                max_trace_deviation: dev,
                lowest_eigenvalue: 0.0,
                failed: false,
                drive: d.summary(cfg.drive.source),
            };
            (table, summary)
        }
        Some(kind) => {
            let (trace, steady) = match cfg.model.split {
                Split::Joint => {
                    let gen = generator_for(&d.schedule, &d.system, kind, cfg.model.broadening())?;
                    let trace = evolve(&gen, &mixed(n), &icfg)?;
                    (trace, steady_error(&gen, n))
                }
                Split::Alternating => {
                    let (z, x) = split_generators(&d, cfg.model.broadening())?;
                    let trace = run(Evolution::Alternating { z: &z, x: &x }, &mixed(n), &icfg)?;
                    (trace, None)
                }
            };
            let table = trace_table(&trace, n);
            let summary = SimulateSummary {
                n_qubits: n,
                model: cfg.model.kind.name(),
                split: cfg.model.split,
                samples: trace.len(),
                final_fidelity: trace.final_fidelity(),
                target_fidelity: cfg.target_fidelity,
                time_to_target: sampled_crossing(&trace.times, &trace.fidelity, cfg.target_fidelity),
                steady_error: steady,
                max_trace_deviation: trace.max_trace_deviation(),
                lowest_eigenvalue: trace.lowest_eigenvalue(),
                failed: trace.failed,
                drive: d.summary(cfg.drive.source),
            };
            (table, summary)
        }
    };
    let csv = out.join("simulate.csv");
    let json = out.join("simulate.json");
    table.write(&csv, hash)?;
    write_json(&json, "simulate", hash, &summary)?;
    if summary.failed {
        return Err(CliError::Numerical(format!(
            "numerical failure: trace deviation {:.3e} exceeded the failure threshold; partial results in {}",
            summary.max_trace_deviation,
            csv.display()
        )));
    }
    Ok(vec![csv.display().to_string(), json.display().to_string()])
}

fn steady_error(gen: &Liouvillian, n: usize) -> Option<f64> {
    if gen.dim() > MAX_DIRECT_DIM {
        return None;
    }
    let rho = steady_state(gen).ok()?;
    let ground = rho.leading_block(1 << n).ok()?;
    let ground =
        if ground.basis() == Basis::Z { ground } else { ghz_core::register::basis_change(&ground, Basis::Z).ok()? };
    Some(1.0 - fidelity(&ground, &ghz_state(n, Sign::Plus).ok()?).ok()?)
}

fn trace_table(trace: &SimTrace, n: usize) -> Table {
    let mut header = vec!["t".to_string(), "fidelity".into(), "ghz_minus".into()];
    header.extend((0..=n).map(|k| format!("sector_{k}")));
    header.extend(["trace_deviation".to_string(), "min_eigenvalue".into()]);
    let mut table = Table::new(header);
    for i in 0..trace.len() {
        let mut row = vec![num(trace.times[i]), num(trace.fidelity[i]), num(trace.ghz_minus[i])];
        row.extend(trace.sectors[i].iter().map(|&p| num(p)));
        row.push(num(trace.trace_deviation[i]));
        row.push(num(trace.min_eigenvalue[i]));
        table.push(row);
    }
    table
}

struct SweepRow {
    tau: Option<f64>,
    bound: f64,
    gamma_e: f64,
    gamma_f: f64,
}

/// Weak driving: the analytic preparation-time bound. Strong driving: the
/// inverse asymptotic pumping rate, a time scale rather than a bound.
fn reference_time(cfg: &RunConfig, n: usize, strong: bool) -> Result<f64, CliError> {
    let e = cfg.drive.error;
    if strong {
        let c = strong_coefficients(strong_rate_ratio()?);
        let nf = n as f64;
        Ok(c.time * nf.powf(1.5) * nf.ln() / e.sqrt())
    } else {
        Ok(weak_time_bound(n, e, cfg.drive.alpha, b_factor(n)?))
    }
}

fn sweep_entry(cfg: &RunConfig, n: usize, kind: Kind) -> Result<SweepRow, CliError> {
    let d = resolve(cfg, n)?;
    let icfg = cfg.integrator.to_core();
    let tau = match kind.quantum() {
        None => {
            let model = compartment_model(cfg, n, &d, false)?;
            model.time_to_target(&mixed_compartments(&model, n), cfg.target_fidelity, icfg.t_max)?
        }
        Some(k) => match cfg.model.split {
            Split::Joint => {
                let gen = generator_for(&d.schedule, &d.system, k, cfg.model.broadening())?;
                time_to_fidelity(Evolution::Joint(&gen), &mixed(n), cfg.target_fidelity, &icfg)?
            }
            Split::Alternating => {
                let (z, x) = split_generators(&d, cfg.model.broadening())?;
                time_to_fidelity(Evolution::Alternating { z: &z, x: &x }, &mixed(n), cfg.target_fidelity, &icfg)?
            }
        },
    };
    Ok(SweepRow {
        tau,
        bound: reference_time(cfg, n, d.strong)?,
        gamma_e: d.system.gamma_e(),
        gamma_f: d.system.gamma_f(),
    })
}

pub fn sweep(cfg: &RunConfig, out: &Path, hash: &str) -> Result<Vec<String>, CliError> {
    if cfg.drive.source == DriveSource::Explicit {
        return Err(CliError::Config {
            key: "drive.source".into(),
            reason: "explicit amplitudes fix the register size; sweeps need an analytic or optimized source".into(),
        });
    }
    let kinds = if cfg.sweep.models.is_empty() { vec![cfg.model.kind] } else { cfg.sweep.models.clone() };
    let entries: Vec<(usize, Kind)> =
        cfg.sweep.n_list.iter().flat_map(|&n| kinds.iter().map(move |&k| (n, k))).collect();
    let results = par::map(&entries, |&(n, k)| sweep_entry(cfg, n, k));
    let mut table =
        Table::new(["n_qubits", "model", "status", "tau_prep", "reference_time", "ratio", "gamma_e", "gamma_f"]);
    for (&(n, k), r) in entries.iter().zip(results) {
        let row = match r {
            Ok(row) => {
                let status = if row.tau.is_some() { "ok" } else { "unreached" };
                vec![
                    n.to_string(),
                    k.name().into(),
                    status.into(),
                    opt(row.tau),
                    num(row.bound),
                    opt(row.tau.map(|t| t / row.bound)),
                    num(row.gamma_e),
                    num(row.gamma_f),
                ]
            }
            Err(e) => {
                let mut v = vec![n.to_string(), k.name().into(), format!("error: {e}")];
                v.extend(std::iter::repeat_n(String::new(), 5));
                v
            }
        };
        table.push(row);
    }
    let csv = out.join("sweep.csv");
    table.write(&csv, hash)?;
    Ok(vec![csv.display().to_string()])
}

#[derive(Serialize)]
struct OptimizeEntry {
    n_qubits: usize,
    seed_time: Option<f64>,
    time: Option<f64>,
    evaluations: usize,
    params: WeakDriveParams,
}

pub fn optimize(cfg: &RunConfig, out: &Path, hash: &str) -> Result<Vec<String>, CliError> {
    let ns = if cfg.optimizer.n_list.is_empty() { vec![cfg.n_qubits] } else { cfg.optimizer.n_list.clone() };
    if cfg.model.kind == Kind::Compartment {
        return Err(CliError::Config {
            key: "model.kind".into(),
            reason: "the optimizer times master-equation models".into(),
        });
    }
    let ocfg = cfg.optimizer_config();
    let mut entries = Vec::new();
    for &n in &ns {
        let seed = weak_seed(cfg, n)?;
        let r = numeric_time_minimizer(&seed, &ocfg)?;
        entries.push(OptimizeEntry {
            n_qubits: n,
            seed_time: r.seed_time,
            time: r.time,
            evaluations: r.evaluations,
            params: r.params,
        });
    }
    let mut table = Table::new([
        "n_qubits",
        "status",
        "seed_time",
        "time",
        "speedup",
        "gamma_e",
        "gamma_f",
        "a_x",
        "a_z",
        "evaluations",
    ]);
    for e in &entries {
        let status = if e.time.is_some() { "ok" } else { "unreached" };
        let speedup = e.seed_time.zip(e.time).map(|(s, t)| s / t);
        let a_z: Vec<String> = e.params.a_z.iter().map(|&a| num(a)).collect();
        table.push(vec![
            e.n_qubits.to_string(),
            status.into(),
            opt(e.seed_time),
            opt(e.time),
            opt(speedup),
            num(e.params.gamma),
            num(e.params.gamma_f),
            num(e.params.a_x),
            a_z.join(";"),
            e.evaluations.to_string(),
        ]);
    }
    let csv = out.join("optimize.csv");
    let json = out.join("optimize.json");
    table.write(&csv, hash)?;
    #[derive(Serialize)]
    struct Body<'a> {
        results: &'a [OptimizeEntry],
    }
    write_json(&json, "optimize", hash, &Body { results: &entries })?;
    Ok(vec![csv.display().to_string(), json.display().to_string()])
}

pub fn ratemodel(cfg: &RunConfig, out: &Path, hash: &str) -> Result<Vec<String>, CliError> {
    if cfg.drive.source == DriveSource::Explicit {
        return Err(CliError::Config {
            key: "drive.source".into(),
            reason: "rate tables are built from analytic parameters".into(),
        });
    }
    let ns = cfg.ratemodel.n_list.clone();
    let rows = par::map(&ns, |&n| -> Result<Vec<String>, CliError> {
        let d = match cfg.drive.source {
            // the table describes the analytic seeds, never optimizer output
            DriveSource::Optimize => resolve(
                &RunConfig {
                    drive: crate::config::DriveSection { source: DriveSource::AnalyticWeak, ..cfg.drive.clone() },
                    ..cfg.clone()
                },
                n,
            )?,
            _ => resolve(cfg, n)?,
        };
        let model = compartment_model(cfg, n, &d, cfg.ratemodel.zero_loss)?;
        let err = model.stationary_error()?;
        let z_plus = model.rates().z_plus;
        let gamma_plus = model.effective_rate(true, 1.0 / z_plus)?;
        Ok(vec![
            n.to_string(),
            num(b_factor(n)?),
            num(kappa_factor(n)?),
            num(err.exact),
            num(err.approximate),
            num(gamma_plus),
            num(z_plus),
        ])
    });
    let mut table = Table::new(["n_qubits", "b", "kappa", "e_exact", "e_approx", "gamma_plus", "gamma_z_plus"]);
    for r in rows {
        table.push(r?);
    }
    let csv = out.join("ratemodel.csv");
    table.write(&csv, hash)?;
    Ok(vec![csv.display().to_string()])
}

pub fn params(cfg: &RunConfig, hash: &str) -> Result<String, CliError> {
    let n = cfg.n_qubits;
    #[derive(Serialize)]
    struct Weak {
        params: WeakDriveParams,
        omega: f64,
        time_bound: f64,
    }
    #[derive(Serialize)]
    struct Strong {
        params: StrongDriveParams,
        pumping_time: f64,
    }
    let body = match cfg.drive.source {
        DriveSource::AnalyticStrong => {
            let p = strong_seed(cfg, n)?;
            serde_json::to_value(Strong { pumping_time: p.exact_pumping_time(), params: p })
        }
        DriveSource::AnalyticWeak | DriveSource::Optimize => {
            let w = weak_seed(cfg, n)?;
            serde_json::to_value(Weak { omega: w.omega(), time_bound: reference_time(cfg, n, false)?, params: w })
        }
        DriveSource::Explicit => {
            let d = resolve(cfg, n)?;
            serde_json::to_value(d.summary(DriveSource::Explicit))
        }
    }
    .map_err(|e| CliError::Output(e.to_string()))?;
    #[derive(Serialize)]
    struct Envelope<'a> {
        tool: &'static str,
        version: &'static str,
        config_hash: &'a str,
        command: &'static str,
        n_qubits: usize,
        analytic: serde_json::Value,
    }
    let env = Envelope {
        tool: "ghzprep",
        version: crate::output::VERSION,
        config_hash: hash,
        command: "params",
        n_qubits: n,
        analytic: body,
    };
    serde_json::to_string_pretty(&env).map_err(|e| CliError::Output(e.to_string()))
}
