//! Run configuration: a TOML document with dotted sections and a strict
//! schema. Unknown keys are rejected at parse time.

use std::path::Path;

use ghz_core::dynamics::{IntegratorConfig, Method};
use ghz_core::optimize::ModelKind;
use ghz_core::optimize::OptimizerConfig;
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::error::CliError;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum DriveSource {
    AnalyticWeak,
    AnalyticStrong,
    Explicit,
    Optimize,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Kind {
    Effective,
    FullK1,
    FullK2,
    Compartment,
}

impl Kind {
    pub fn name(self) -> &'static str {
        match self {
            Kind::Effective => "effective",
            Kind::FullK1 => "full-k1",
            Kind::FullK2 => "full-k2",
            Kind::Compartment => "compartment",
        }
    }

    /// Master-equation model, `None` for the rate model.
    pub fn quantum(self) -> Option<ModelKind> {
        match self {
            Kind::Effective => Some(ModelKind::Effective),
            Kind::FullK1 => Some(ModelKind::FullK1),
            Kind::FullK2 => Some(ModelKind::FullK2),
            Kind::Compartment => None,
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Split {
    /// Z and X pumping applied together.
    Joint,
    /// Alternating Z and X slices of length `integrator.trotter_slice`.
    Alternating,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct RunConfig {
    pub n_qubits: usize,
    pub target_fidelity: f64,
    pub seed: u64,
    pub system: SystemSection,
    pub drive: DriveSection,
    pub model: ModelSection,
    pub integrator: IntegratorSection,
    pub optimizer: OptimizerSection,
    pub sweep: SweepSection,
    pub ratemodel: RatemodelSection,
    pub output: OutputSection,
}

impl Default for RunConfig {
    fn default() -> Self {
        Self {
            n_qubits: 3,
            target_fidelity: 0.9,
            seed: 0,
            system: SystemSection::default(),
            drive: DriveSection::default(),
            model: ModelSection::default(),
            integrator: IntegratorSection::default(),
            optimizer: OptimizerSection::default(),
            sweep: SweepSection::default(),
            ratemodel: RatemodelSection::default(),
            output: OutputSection::default(),
        }
    }
}

/// Linewidths and oscillator losses in units of the coupling `g`.
#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SystemSection {
    /// Overrides the analytic Z linewidth (keeping `Ω = αγ`); required for
    /// explicit drives.
    pub gamma_e: Option<f64>,
    pub gamma_f: Option<f64>,
    pub kappa_b: f64,
    pub kappa_c: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct DriveSection {
    pub source: DriveSource,
    /// Stationary error the analytic parameters are tuned for.
    pub error: f64,
    /// `Ω/γ` for the weak-driving parameters.
    pub alpha: f64,
    /// Z Rabi frequencies for `F = 1..N−1` (explicit source).
    pub z_rabi: Option<Vec<f64>>,
    /// Rabi frequencies of the odd X tones (explicit source).
    pub x_rabi: Option<Vec<f64>>,
}

impl Default for DriveSection {
    fn default() -> Self {
        Self { source: DriveSource::AnalyticWeak, error: 0.05, alpha: 0.25, z_rabi: None, x_rabi: None }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ModelSection {
    pub kind: Kind,
    /// Power-broadening factor for the effective and rate models; 0 turns it off.
    pub broadening: f64,
    pub split: Split,
}

impl Default for ModelSection {
    fn default() -> Self {
        Self { kind: Kind::Effective, broadening: 2.0, split: Split::Joint }
    }
}

impl ModelSection {
    pub fn broadening(&self) -> Option<f64> {
        (self.broadening > 0.0).then_some(self.broadening)
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct IntegratorSection {
    pub method: Method,
    pub initial_step: f64,
    pub rtol: f64,
    pub atol: f64,
    pub t_max: f64,
    pub sample_interval: f64,
    pub trotter_slice: f64,
    pub max_steps: usize,
}

impl Default for IntegratorSection {
    fn default() -> Self {
        let d = IntegratorConfig::default();
        Self {
            method: d.method,
            initial_step: d.initial_step,
            rtol: d.rtol,
            atol: d.atol,
            t_max: d.t_max,
            sample_interval: d.sample_interval,
            trotter_slice: d.trotter_slice,
            max_steps: d.max_steps,
        }
    }
}

impl IntegratorSection {
    pub fn to_core(&self) -> IntegratorConfig {
        IntegratorConfig {
            method: self.method,
            initial_step: self.initial_step,
            rtol: self.rtol,
            atol: self.atol,
            t_max: self.t_max,
            sample_interval: self.sample_interval,
            trotter_slice: self.trotter_slice,
            max_steps: self.max_steps,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct OptimizerSection {
    pub max_iterations: usize,
    pub restarts: usize,
    pub jitter: f64,
    pub step: f64,
    /// Register sizes for the `optimize` command; empty means `n_qubits`.
    pub n_list: Vec<usize>,
}

impl Default for OptimizerSection {
    fn default() -> Self {
        Self { max_iterations: 200, restarts: 3, jitter: 0.1, step: 0.2, n_list: vec![] }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SweepSection {
    pub n_list: Vec<usize>,
    /// Models timed per register size; empty means `model.kind`.
    pub models: Vec<Kind>,
}

impl Default for SweepSection {
    fn default() -> Self {
        Self { n_list: vec![2, 3, 4, 5], models: vec![] }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct RatemodelSection {
    pub n_list: Vec<usize>,
    /// Drop every loss rate out of |GHZ⟩.
    pub zero_loss: bool,
}

impl Default for RatemodelSection {
    fn default() -> Self {
        Self { n_list: vec![2, 3, 4, 5, 6, 7, 8, 10, 20, 50, 100], zero_loss: false }
    }
}

#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct OutputSection {
    /// Output directory; `--out` takes precedence.
    pub dir: Option<String>,
}

fn bad(key: &str, reason: impl Into<String>) -> CliError {
    CliError::Config { key: key.to_string(), reason: reason.into() }
}

fn positive(key: &str, v: f64) -> Result<(), CliError> {
    if v > 0.0 && v.is_finite() {
        Ok(())
    } else {
        Err(bad(key, format!("must be finite and > 0, got {v}")))
    }
}

fn non_negative(key: &str, v: f64) -> Result<(), CliError> {
    if v >= 0.0 && v.is_finite() {
        Ok(())
    } else {
        Err(bad(key, format!("must be finite and >= 0, got {v}")))
    }
}

fn register_sizes(key: &str, ns: &[usize]) -> Result<(), CliError> {
    match ns.iter().find(|&&n| n < 2) {
        Some(n) => Err(bad(key, format!("register sizes must be >= 2, got {n}"))),
        None => Ok(()),
    }
}

impl RunConfig {
    pub fn from_toml(text: &str) -> Result<Self, CliError> {
        toml::from_str(text).map_err(|e| CliError::Parse(e.to_string()))
    }

    pub fn load(path: &Path) -> Result<Self, CliError> {
        let text = std::fs::read_to_string(path).map_err(|e| bad("--config", format!("{}: {e}", path.display())))?;
        Self::from_toml(&text)
    }

    /// Checks that do not need any computation. Keys are reported with
    /// their section prefix.
    pub fn validate(&self) -> Result<(), CliError> {
        if self.n_qubits < 2 {
            return Err(bad("n_qubits", format!("must be >= 2, got {}", self.n_qubits)));
        }
        if self.n_qubits > ghz_core::register::MAX_QUBITS {
            return Err(bad("n_qubits", format!("at most {} qubits supported", ghz_core::register::MAX_QUBITS)));
        }
        if !(self.target_fidelity > 0.0 && self.target_fidelity < 1.0) {
            return Err(bad("target_fidelity", "must lie in (0, 1)"));
        }
        if let Some(g) = self.system.gamma_e {
            positive("system.gamma_e", g)?;
        }
        if let Some(g) = self.system.gamma_f {
            positive("system.gamma_f", g)?;
        }
        non_negative("system.kappa_b", self.system.kappa_b)?;
        non_negative("system.kappa_c", self.system.kappa_c)?;

        let d = &self.drive;
        if !(d.error > 0.0 && d.error < 1.0) {
            return Err(bad("drive.error", "must lie in (0, 1)"));
        }
        positive("drive.alpha", d.alpha)?;
        match d.source {
            DriveSource::Explicit => {
                if self.system.gamma_e.is_none() {
                    return Err(bad("system.gamma_e", "required with drive.source = \"explicit\""));
                }
                if d.z_rabi.is_none() {
                    return Err(bad("drive.z_rabi", "required with drive.source = \"explicit\""));
                }
                if d.x_rabi.is_none() {
                    return Err(bad("drive.x_rabi", "required with drive.source = \"explicit\""));
                }
            }
            _ => {
                for (key, v) in [("drive.z_rabi", &d.z_rabi), ("drive.x_rabi", &d.x_rabi)] {
                    if v.is_some() {
                        return Err(bad(key, "only allowed with drive.source = \"explicit\""));
                    }
                }
            }
        }
        if d.source == DriveSource::Optimize && (self.system.kappa_b > 0.0 || self.system.kappa_c > 0.0) {
            return Err(bad("system.kappa_b", "the optimizer assumes lossless oscillators"));
        }

        non_negative("model.broadening", self.model.broadening)?;
        if self.model.split == Split::Alternating && self.model.kind != Kind::Effective {
            return Err(bad("model.split", "alternating evolution needs model.kind = \"effective\""));
        }

        let i = &self.integrator;
        for (key, v) in [
            ("integrator.initial_step", i.initial_step),
            ("integrator.rtol", i.rtol),
            ("integrator.atol", i.atol),
            ("integrator.t_max", i.t_max),
            ("integrator.sample_interval", i.sample_interval),
            ("integrator.trotter_slice", i.trotter_slice),
        ] {
            positive(key, v)?;
        }
        if i.max_steps == 0 {
            return Err(bad("integrator.max_steps", "must be > 0"));
        }
        i.to_core().validate().map_err(|e| bad("integrator", e.to_string()))?;

        let o = &self.optimizer;
        positive("optimizer.step", o.step)?;
        non_negative("optimizer.jitter", o.jitter)?;
        register_sizes("optimizer.n_list", &o.n_list)?;

        if self.sweep.n_list.is_empty() {
            return Err(bad("sweep.n_list", "must not be empty"));
        }
        register_sizes("sweep.n_list", &self.sweep.n_list)?;
        register_sizes("ratemodel.n_list", &self.ratemodel.n_list)?;
        if self.ratemodel.n_list.is_empty() {
            return Err(bad("ratemodel.n_list", "must not be empty"));
        }
        Ok(())
    }

    pub fn optimizer_config(&self) -> OptimizerConfig {
        OptimizerConfig {
            max_iterations: self.optimizer.max_iterations,
            restarts: self.optimizer.restarts,
            jitter: self.optimizer.jitter,
            step: self.optimizer.step,
            seed: self.seed,
            target_fidelity: self.target_fidelity,
            model: self.model.kind.quantum().unwrap_or(ModelKind::Effective),
            broadening: self.model.broadening(),
            integrator: self.integrator.to_core(),
        }
    }

    /// SHA-256 over the canonical JSON form. The output directory is left
    /// out so moving results does not change their identity.
    pub fn hash(&self) -> String {
        let mut canonical = self.clone();
        canonical.output = OutputSection::default();
        let bytes = serde_json::to_vec(&canonical).expect("config serializes");
        Sha256::digest(&bytes).iter().map(|b| format!("{b:02x}")).collect()
    }
}
