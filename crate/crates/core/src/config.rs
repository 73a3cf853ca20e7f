//! Run configuration shared by every subcommand.
//!
//! The file is JSON. Missing keys take their defaults, unknown keys are
//! rejected, and all physical quantities are SI. Two environment variables
//! override the file:
//!
//! - `CYBORG_OUTPUT_DIR` replaces `output_dir`
//! - `CYBORG_SEED` replaces `seed`

use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};
use thiserror::Error;

use crate::assembly::{PayloadSpec, PlanConfig, Workspace, DEFAULT_HANDLING_GAP};
use crate::locomotion::AgentParams;
use crate::morphology::{FixationRig, InsectMorphology};
use crate::neurosignal::{NeuralResponseModel, PipelineParams, DEFAULT_SAMPLE_RATE};
use crate::swarm::{Arena, CoverageSource, SwarmConfig, UwbSystem, DEFAULT_CELL_SIZE};
use crate::vision::{PosteriorDirection, ShieldParams};

pub const SCHEMA_VERSION: u32 = 1;
pub const ENV_OUTPUT_DIR: &str = "CYBORG_OUTPUT_DIR";
pub const ENV_SEED: &str = "CYBORG_SEED";

#[derive(Debug, Error)]
pub enum ConfigError {
    #[error("cannot read config {path}: {source}")]
    Read { path: PathBuf, source: std::io::Error },
    #[error("config line {line}, column {column}: {message}")]
    Parse { line: usize, column: usize, message: String },
    #[error("unsupported schema_version {0} (expected {SCHEMA_VERSION})")]
    Schema(u32),
    #[error("invalid value for {field}: {message}")]
    Invalid { field: String, message: String },
}

fn invalid(field: &str, message: impl ToString) -> ConfigError {
    ConfigError::Invalid { field: field.to_string(), message: message.to_string() }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct AssemblyBlock {
    pub plan: PlanConfig,
    pub payload: PayloadSpec,
    pub workspace: Workspace,
    /// Arm approach envelope checked against the workspace, meters.
    pub approach_envelope: [f64; 3],
    /// Seconds between consecutive insects in a batch.
    pub handling_gap: f64,
    /// Shape of the synthetic top-view mask the reference point is read from.
    pub shield: ShieldParams,
    pub posterior: PosteriorDirection,
}

impl Default for AssemblyBlock {
    fn default() -> Self {
        Self {
            plan: PlanConfig::default(),
            payload: PayloadSpec::default(),
            workspace: Workspace::default(),
            approach_envelope: [0.03, 0.01, 0.01],
            handling_gap: DEFAULT_HANDLING_GAP,
            shield: ShieldParams::default(),
            posterior: PosteriorDirection::default(),
        }
    }
}

/// Voltage sweep for the rate-versus-voltage curve.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SweepConfig {
    pub v_start: f64,
    pub v_stop: f64,
    pub v_step: f64,
    pub seeds: usize,
}

impl Default for SweepConfig {
    fn default() -> Self {
        Self { v_start: 0.5, v_stop: 4.0, v_step: 0.5, seeds: 50 }
    }
}

impl SweepConfig {
    pub fn voltages(&self) -> Vec<f64> {
        let n = ((self.v_stop - self.v_start) / self.v_step + 1e-9).floor() as usize;
        (0..=n).map(|i| self.v_start + i as f64 * self.v_step).collect()
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct NeuroBlock {
    pub sample_rate: f64,
    pub pipeline: PipelineParams,
    pub model: NeuralResponseModel,
    pub sweep: SweepConfig,
}

impl Default for NeuroBlock {
    fn default() -> Self {
        Self {
            sample_rate: DEFAULT_SAMPLE_RATE,
            pipeline: PipelineParams::default(),
            model: NeuralResponseModel::default(),
            sweep: SweepConfig::default(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct LocomotionBlock {
    /// `"manual"` or `"auto"`.
    pub preset: String,
    /// Full parameter set; replaces the preset when given.
    pub params: Option<AgentParams>,
}

impl Default for LocomotionBlock {
    fn default() -> Self {
        Self { preset: "auto".into(), params: None }
    }
}

impl LocomotionBlock {
    pub fn resolve(&self) -> Result<AgentParams, ConfigError> {
        match self.params {
            Some(p) => Ok(p),
            None => AgentParams::preset(&self.preset).map_err(|e| invalid("locomotion.preset", e)),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SwarmBlock {
    pub agents: usize,
    /// Fixed layout; a seeded random layout is drawn when absent.
    pub arena: Option<Arena>,
    /// Anchor layout; a 3.6 m square around the arena when absent.
    pub uwb: Option<UwbSystem>,
    pub stim_period: f64,
    pub stim_duration: f64,
    pub duration: f64,
    pub dt: f64,
    pub log_rate_hz: f64,
    pub cell_size: f64,
    pub coverage_source: CoverageSource,
}

impl Default for SwarmBlock {
    fn default() -> Self {
        let d = SwarmConfig::with_seed(0);
        Self {
            agents: d.agents.len(),
            arena: None,
            uwb: None,
            stim_period: d.stim_period,
            stim_duration: d.stim_duration,
            duration: d.duration,
            dt: d.dt,
            log_rate_hz: d.log_rate_hz,
            cell_size: DEFAULT_CELL_SIZE,
            coverage_source: d.coverage_source,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct RunConfig {
    pub schema_version: u32,
    pub seed: u64,
    pub output_dir: PathBuf,
    pub morphology: InsectMorphology,
    pub rig: FixationRig,
    pub assembly: AssemblyBlock,
    pub neurosignal: NeuroBlock,
    pub locomotion: LocomotionBlock,
    pub swarm: SwarmBlock,
}

impl Default for RunConfig {
    fn default() -> Self {
        Self {
            schema_version: SCHEMA_VERSION,
            seed: 0,
            output_dir: PathBuf::from("out"),
            morphology: InsectMorphology::default(),
            rig: FixationRig::default(),
            assembly: AssemblyBlock::default(),
            neurosignal: NeuroBlock::default(),
            locomotion: LocomotionBlock::default(),
            swarm: SwarmBlock::default(),
        }
    }
}

impl RunConfig {
    /// Parse and validate a config document. Environment overrides are not
    /// applied here.
    pub fn from_json(text: &str) -> Result<Self, ConfigError> {
        let cfg: RunConfig = serde_json::from_str(text).map_err(|e| ConfigError::Parse {
            line: e.line(),
            column: e.column(),
            message: e.to_string(),
        })?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn from_file(path: &Path) -> Result<Self, ConfigError> {
        let text =
            std::fs::read_to_string(path).map_err(|source| ConfigError::Read { path: path.to_path_buf(), source })?;
        Self::from_json(&text)
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("config serializes")
    }

    /// Apply `CYBORG_OUTPUT_DIR` and `CYBORG_SEED` from the process environment.
    pub fn apply_env(&mut self) -> Result<(), ConfigError> {
        self.apply_overrides(std::env::var(ENV_OUTPUT_DIR).ok(), std::env::var(ENV_SEED).ok())
    }

    pub fn apply_overrides(&mut self, output_dir: Option<String>, seed: Option<String>) -> Result<(), ConfigError> {
        if let Some(dir) = output_dir.filter(|d| !d.is_empty()) {
            self.output_dir = PathBuf::from(dir);
        }
        if let Some(s) = seed {
            self.seed = s.trim().parse().map_err(|_| invalid(ENV_SEED, format!("not an unsigned integer: {s:?}")))?;
        }
        Ok(())
    }

    pub fn validate(&self) -> Result<(), ConfigError> {
        if self.schema_version != SCHEMA_VERSION {
            return Err(ConfigError::Schema(self.schema_version));
        }
        if self.output_dir.as_os_str().is_empty() {
            return Err(invalid("output_dir", "must not be empty"));
        }
        self.rig.validate().map_err(|e| invalid("rig", e))?;
        if !(self.assembly.handling_gap >= 0.0) {
            return Err(invalid("assembly.handling_gap", "must be >= 0"));
        }
        let n = &self.neurosignal;
        if !(n.sample_rate > 0.0) {
            return Err(invalid("neurosignal.sample_rate", "must be > 0"));
        }
        let s = &n.sweep;
        if !(s.v_step > 0.0 && s.v_start >= 0.0 && s.v_stop >= s.v_start && s.v_stop <= 5.0) || s.seeds == 0 {
            return Err(invalid("neurosignal.sweep", "need 0 <= v_start <= v_stop <= 5, v_step > 0, seeds > 0"));
        }
        let params = self.locomotion.resolve()?;
        params.validate().map_err(|e| invalid("locomotion", e))?;
        self.swarm_config(None).validate().map_err(|e| invalid("swarm", e))?;
        Ok(())
    }

    /// Swarm mission for this config, optionally with a different team size.
    pub fn swarm_config(&self, agents: Option<usize>) -> SwarmConfig {
        let b = &self.swarm;
        let arena = b.arena.clone().unwrap_or_else(|| Arena::random(self.seed));
        let uwb = b.uwb.clone().unwrap_or_else(|| UwbSystem::around(&arena));
        let params = self.locomotion.resolve().unwrap_or_else(|_| AgentParams::auto());
        SwarmConfig {
            arena,
            uwb,
            agents: vec![params; agents.unwrap_or(b.agents)],
            stim_period: b.stim_period,
            stim_duration: b.stim_duration,
            duration: b.duration,
            dt: b.dt,
            log_rate_hz: b.log_rate_hz,
            cell_size: b.cell_size,
            coverage_source: b.coverage_source,
            seed: self.seed,
        }
    }

    /// SHA-256 of the canonical JSON form, hex encoded. `output_dir` is left
    /// out since it does not affect results.
    pub fn hash(&self) -> String {
        let canonical = RunConfig { output_dir: PathBuf::new(), ..self.clone() };
        let bytes = serde_json::to_vec(&canonical).expect("config serializes");
        hex::encode(Sha256::digest(bytes))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn empty_object_is_defaults() {
        assert_eq!(RunConfig::from_json("{}").unwrap(), RunConfig::default());
    }

    #[test]
    fn round_trip_is_lossless() {
        let mut cfg = RunConfig { seed: 99, ..RunConfig::default() };
        cfg.rig.lowered_distance_d = 1.234_567_890_123e-3;
        cfg.swarm.arena = Some(Arena::random(3));
        let back = RunConfig::from_json(&cfg.to_json()).unwrap();
        assert_eq!(back, cfg);
        assert_eq!(back.hash(), cfg.hash());
    }

    #[test]
    fn unknown_key_reports_position() {
        let err = RunConfig::from_json("{\n  \"seed\": 1,\n  \"sede\": 2\n}").unwrap_err();
        match err {
            ConfigError::Parse { line, message, .. } => {
                assert_eq!(line, 3);
                assert!(message.contains("sede"));
            }
            other => panic!("{other}"),
        }
    }

    #[test]
    fn schema_and_value_checks() {
        assert!(matches!(RunConfig::from_json(r#"{"schema_version": 2}"#), Err(ConfigError::Schema(2))));
        assert!(RunConfig::from_json(r#"{"locomotion": {"preset": "fast"}}"#).is_err());
        assert!(RunConfig::from_json(r#"{"swarm": {"duration": -1}}"#).is_err());
        assert!(RunConfig::from_json(r#"{"rig": {"lowered_distance_d": -0.001}}"#).is_err());
    }

    #[test]
    fn overrides() {
        let mut cfg = RunConfig::default();
        cfg.apply_overrides(Some("elsewhere".into()), Some(" 17 ".into())).unwrap();
        assert_eq!(cfg.output_dir, PathBuf::from("elsewhere"));
        assert_eq!(cfg.seed, 17);
        assert!(cfg.apply_overrides(None, Some("-3".into())).is_err());
        let h = cfg.hash();
        cfg.output_dir = PathBuf::from("another");
        assert_eq!(cfg.hash(), h);
        cfg.seed = 18;
        assert_ne!(cfg.hash(), h);
    }

    #[test]
    fn sweep_voltages() {
        let v = SweepConfig::default().voltages();
        assert_eq!(v.len(), 8);
        assert_eq!(v[0], 0.5);
        assert_eq!(v[7], 4.0);
    }
}
