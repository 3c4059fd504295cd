//! Experiment configuration: TOML schema, validation, defaults, hashing.

use std::fs;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::error::{CliError, Result};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Mode {
    Simulate,
    Train,
    Sweep,
    OracleCheck,
}

#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct WellSection {
    pub n: i64,
    #[serde(default)]
    pub eta: f64,
    #[serde(default)]
    pub gamma: f64,
    #[serde(default)]
    pub delta: f64,
    /// Names of parameters held fixed during training: "eta", "gamma", "delta".
    #[serde(default)]
    pub frozen: Vec<String>,
    /// Initial state for simulation or training: all_left (default), all_right,
    /// plus (coherent 50/50 superposition), mixed, random.
    #[serde(default)]
    pub state: Option<String>,
    /// Keep the ancilla state fixed during training instead of learning it.
    #[serde(default)]
    pub frozen_state: bool,
}

#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CouplingSection {
    #[serde(default = "default_alpha")]
    pub alpha: f64,
    /// Learn/apply the full 3x3 alpha_ij instead of the scalar z-z form.
    #[serde(default)]
    pub matrix: bool,
    #[serde(default)]
    pub frozen: bool,
}

fn default_alpha() -> f64 {
    1.0
}

impl Default for CouplingSection {
    fn default() -> Self {
        CouplingSection { alpha: 1.0, matrix: false, frozen: false }
    }
}

#[derive(Clone, Copy, Debug, Serialize, Deserialize, Default)]
#[serde(deny_unknown_fields)]
pub struct NoiseSection {
    #[serde(default)]
    pub lambda_s: f64,
    #[serde(default)]
    pub lambda_a: f64,
}

#[derive(Clone, Copy, Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct IntegratorSection {
    #[serde(default = "default_dt")]
    pub dt: f64,
    #[serde(default = "default_horizon")]
    pub horizon_t: f64,
    #[serde(default = "default_sample_every")]
    pub sample_every: usize,
}

fn default_dt() -> f64 {
    0.01
}
fn default_horizon() -> f64 {
    20.0
}
fn default_sample_every() -> usize {
    10
}

impl Default for IntegratorSection {
    fn default() -> Self {
        IntegratorSection {
            dt: default_dt(),
            horizon_t: default_horizon(),
            sample_every: default_sample_every(),
        }
    }
}

#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct OptimizerSection {
    #[serde(default = "default_lr")]
    pub lr: f64,
    #[serde(default = "default_max_iters")]
    pub max_iters: usize,
    #[serde(default)]
    pub seed: u64,
    /// finite_diff | forward_dual
    #[serde(default = "default_engine")]
    pub engine: String,
    /// factor | diagonal; defaults to factor when noiseless, diagonal when noisy
    #[serde(default)]
    pub ancilla_mode: Option<String>,
    /// ones | random
    #[serde(default = "default_init")]
    pub init: String,
    #[serde(default = "default_t_init")]
    pub t_init: f64,
    #[serde(default)]
    pub t_frozen: bool,
    /// Integrator settings for the noisy training objective (full-accuracy
    /// evaluation always uses the [integrator] section).
    #[serde(default = "default_train_dt")]
    pub train_dt: f64,
    #[serde(default = "default_train_horizon")]
    pub train_horizon: f64,
}

fn default_lr() -> f64 {
    0.01
}
fn default_max_iters() -> usize {
    2000
}
fn default_engine() -> String {
    "finite_diff".into()
}
fn default_init() -> String {
    "ones".into()
}
fn default_t_init() -> f64 {
    1.0
}
fn default_train_dt() -> f64 {
    0.05
}
fn default_train_horizon() -> f64 {
    20.0
}

impl Default for OptimizerSection {
    fn default() -> Self {
        OptimizerSection {
            lr: default_lr(),
            max_iters: default_max_iters(),
            seed: 0,
            engine: default_engine(),
            ancilla_mode: None,
            init: default_init(),
            t_init: default_t_init(),
            t_frozen: false,
            train_dt: default_train_dt(),
            train_horizon: default_train_horizon(),
        }
    }
}

#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SweepSection {
    pub n_s: Vec<i64>,
    pub n_a: Vec<i64>,
    #[serde(default = "default_seeds")]
    pub seeds: Vec<u64>,
}

fn default_seeds() -> Vec<u64> {
    vec![0]
}

#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct OutputSection {
    #[serde(default = "default_out_dir")]
    pub dir: PathBuf,
    /// Append the flattened density matrix to trajectory CSVs.
    #[serde(default)]
    pub write_rho: bool,
    #[serde(default)]
    pub plot: bool,
}

fn default_out_dir() -> PathBuf {
    PathBuf::from("out")
}

impl Default for OutputSection {
    fn default() -> Self {
        OutputSection { dir: default_out_dir(), write_rho: false, plot: false }
    }
}

/// One fully validated experiment description.
#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    pub mode: Mode,
    pub system: WellSection,
    #[serde(default)]
    pub ancilla: Option<WellSection>,
    #[serde(default)]
    pub coupling: Option<CouplingSection>,
    #[serde(default)]
    pub noise: NoiseSection,
    #[serde(default)]
    pub integrator: IntegratorSection,
    #[serde(default)]
    pub optimizer: OptimizerSection,
    #[serde(default)]
    pub sweep: Option<SweepSection>,
    #[serde(default)]
    pub output: OutputSection,
}

impl ExperimentConfig {
    pub fn load(path: &Path) -> Result<Self> {
        let text = fs::read_to_string(path).map_err(|e| {
            CliError::Config(format!("cannot read config {}: {e}", path.display()))
        })?;
        let cfg: ExperimentConfig = toml::from_str(&text)
            .map_err(|e| CliError::Config(format!("{}: {e}", path.display())))?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn validate(&self) -> Result<()> {
        validate_well("system", &self.system)?;
        if let Some(anc) = &self.ancilla {
            validate_well("ancilla", anc)?;
        }
        if self.noise.lambda_s < 0.0 {
            return Err(CliError::Config("noise.lambda_s must be >= 0".into()));
        }
        if self.noise.lambda_a < 0.0 {
            return Err(CliError::Config("noise.lambda_a must be >= 0".into()));
        }
        if self.integrator.dt <= 0.0 || self.integrator.dt > 0.1 {
            return Err(CliError::Config(format!(
                "integrator.dt must be in (0, 0.1], got {}",
                self.integrator.dt
            )));
        }
        if self.integrator.horizon_t <= 0.0 {
            return Err(CliError::Config("integrator.horizon_t must be positive".into()));
        }
        if self.integrator.sample_every == 0 {
            return Err(CliError::Config("integrator.sample_every must be >= 1".into()));
        }
        if self.optimizer.lr <= 0.0 {
            return Err(CliError::Config("optimizer.lr must be positive".into()));
        }
        if self.optimizer.max_iters == 0 {
            return Err(CliError::Config("optimizer.max_iters must be >= 1".into()));
        }
        if self.optimizer.t_init <= 0.0 {
            return Err(CliError::Config("optimizer.t_init must be positive".into()));
        }
        match self.optimizer.engine.as_str() {
            "finite_diff" | "forward_dual" => {}
            other => {
                return Err(CliError::Config(format!(
                    "optimizer.engine must be finite_diff or forward_dual, got {other:?}"
                )))
            }
        }
        if let Some(mode) = &self.optimizer.ancilla_mode {
            if mode != "factor" && mode != "diagonal" {
                return Err(CliError::Config(format!(
                    "optimizer.ancilla_mode must be factor or diagonal, got {mode:?}"
                )));
            }
        }
        match self.optimizer.init.as_str() {
            "ones" | "random" => {}
            other => {
                return Err(CliError::Config(format!(
                    "optimizer.init must be ones or random, got {other:?}"
                )))
            }
        }
        if let Some(state) = self.system.state.as_deref() {
            validate_state("system.state", state)?;
        }
        if let Some(anc) = &self.ancilla {
            if let Some(state) = anc.state.as_deref() {
                validate_state("ancilla.state", state)?;
                if state == "plus" && self.resolved_ancilla_mode() == "diagonal" {
                    return Err(CliError::Config(
                        "ancilla.state = \"plus\" carries coherences; it cannot be used with the diagonal ancilla mode".into(),
                    ));
                }
            }
        }

        match self.mode {
            Mode::Simulate => {
                if self.coupling.is_some() && self.ancilla.is_none() {
                    return Err(CliError::Config(
                        "coupling requires an ancilla section".into(),
                    ));
                }
            }
            Mode::Train => {
                if self.ancilla.is_none() {
                    return Err(CliError::Config("train mode requires an ancilla section".into()));
                }
            }
            Mode::Sweep => {
                let sweep = self
                    .sweep
                    .as_ref()
                    .ok_or_else(|| CliError::Config("sweep mode requires a sweep section".into()))?;
                if sweep.n_s.is_empty() || sweep.n_a.is_empty() || sweep.seeds.is_empty() {
                    return Err(CliError::Config(
                        "sweep.n_s, sweep.n_a and sweep.seeds must be non-empty".into(),
                    ));
                }
                for (key, list) in [("sweep.n_s", &sweep.n_s), ("sweep.n_a", &sweep.n_a)] {
                    if let Some(bad) = list.iter().find(|&&n| n < 1) {
                        return Err(CliError::Config(format!(
                            "{key} entries must be >= 1, got {bad}"
                        )));
                    }
                }
            }
            Mode::OracleCheck => {
                if self.noise.lambda_s > 0.0 || self.noise.lambda_a > 0.0 {
                    return Err(CliError::Config(
                        "oracle_check contradicts nonzero noise: the closed form is noiseless"
                            .into(),
                    ));
                }
                if self.system.n != 1 {
                    return Err(CliError::Config(
                        "oracle_check requires system.n = 1 (solvable limit)".into(),
                    ));
                }
                if self.system.eta != 0.0 {
                    return Err(CliError::Config(
                        "oracle_check requires system.eta = 0 (solvable limit)".into(),
                    ));
                }
            }
        }
        Ok(())
    }

    /// The ancilla-mode string resolved against the noise default: the noisy
    /// protocol constrains the learned state to be real diagonal.
    pub fn resolved_ancilla_mode(&self) -> &str {
        match &self.optimizer.ancilla_mode {
            Some(m) => m.as_str(),
            None if self.is_noisy() => "diagonal",
            None => "factor",
        }
    }

    pub fn is_noisy(&self) -> bool {
        self.noise.lambda_s > 0.0 || self.noise.lambda_a > 0.0
    }

    /// Hash of the canonical serialized form: changes exactly when a semantic
    /// field changes (defaults are materialized before hashing; the output
    /// section only steers where artifacts land, so it is excluded).
    pub fn semantic_hash(&self) -> String {
        let mut semantic = self.clone();
        semantic.output = OutputSection::default();
        let canonical = toml::to_string(&semantic).expect("config serializes");
        let digest = Sha256::digest(canonical.as_bytes());
        let mut hex = String::with_capacity(64);
        for byte in digest {
            hex.push_str(&format!("{byte:02x}"));
        }
        hex
    }
}

fn validate_well(section: &str, well: &WellSection) -> Result<()> {
    if well.n < 1 {
        return Err(CliError::Config(format!(
            "{section}.n must be a positive particle count, got {}",
            well.n
        )));
    }
    for name in &well.frozen {
        if !matches!(name.as_str(), "eta" | "gamma" | "delta") {
            return Err(CliError::Config(format!(
                "{section}.frozen entries must be eta, gamma or delta, got {name:?}"
            )));
        }
    }
    Ok(())
}

fn validate_state(key: &str, state: &str) -> Result<()> {
    match state {
        "all_left" | "all_right" | "plus" | "mixed" | "random" => Ok(()),
        other => Err(CliError::Config(format!(
            "{key} must be one of all_left, all_right, plus, mixed, random; got {other:?}"
        ))),
    }
}
