//! Versioned JSON files for pipeline configs and sweep plans.

use std::path::{Path, PathBuf};

use rirdenoise_core::pipeline::PipelineConfig;
use rirdenoise_core::synth::SweepPlan;
use rirdenoise_core::wavelet::WaveletFilterBank;
use serde::{Deserialize, Serialize};

use crate::CliError;

pub const SCHEMA_VERSION: u32 = 1;

/// Pipeline config file. `wavelet_file`, if set, names a filter-bank text file
/// (resolved relative to the config file) that replaces the shipped `wavelet`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ConfigFile {
    pub schema_version: u32,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub wavelet_file: Option<PathBuf>,
    #[serde(flatten)]
    pub pipeline: PipelineConfig,
}

impl Default for ConfigFile {
    fn default() -> Self {
        Self { schema_version: SCHEMA_VERSION, wavelet_file: None, pipeline: PipelineConfig::default() }
    }
}

/// Sweep plan file: the trial grid plus the pipeline config used by both arms.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PlanFile {
    pub schema_version: u32,
    #[serde(default)]
    pub pipeline: PipelineConfig,
    #[serde(flatten)]
    pub plan: SweepPlan,
}

impl Default for PlanFile {
    fn default() -> Self {
        Self { schema_version: SCHEMA_VERSION, pipeline: PipelineConfig::default(), plan: SweepPlan::default() }
    }
}

/// A resolved pipeline config and its filter bank.
#[derive(Debug, Clone)]
pub struct ResolvedConfig {
    pub pipeline: PipelineConfig,
    pub bank: WaveletFilterBank,
}

fn read_json<T: for<'de> Deserialize<'de>>(path: &Path, what: &str) -> Result<T, CliError> {
    let text = std::fs::read_to_string(path).map_err(|e| CliError::input(path, e))?;
    let value: serde_json::Value =
        serde_json::from_str(&text).map_err(|e| CliError::invalid(what, format!("{}: {e}", path.display())))?;
    check_version(&value, path, what)?;
    serde_json::from_value(value).map_err(|e| CliError::invalid(what, format!("{}: {e}", path.display())))
}

fn check_version(value: &serde_json::Value, path: &Path, what: &str) -> Result<(), CliError> {
    match value.get("schema_version").and_then(|v| v.as_u64()) {
        Some(v) if v == SCHEMA_VERSION as u64 => Ok(()),
        Some(v) => Err(CliError::invalid(
            what,
            format!("{}: schema_version {v} is not supported (expected {SCHEMA_VERSION})", path.display()),
        )),
        None => Err(CliError::invalid(what, format!("{}: missing schema_version", path.display()))),
    }
}

pub fn load_config(path: Option<&Path>) -> Result<ResolvedConfig, CliError> {
    let (file, base) = match path {
        Some(p) => (read_json::<ConfigFile>(p, "config")?, p.parent().map(Path::to_path_buf)),
        None => (ConfigFile::default(), None),
    };
    resolve(file.pipeline, file.wavelet_file.as_deref(), base.as_deref())
}

pub fn resolve(
    mut pipeline: PipelineConfig,
    wavelet_file: Option<&Path>,
    base: Option<&Path>,
) -> Result<ResolvedConfig, CliError> {
    let bank = match wavelet_file {
        Some(rel) => {
            let path = match base {
                Some(b) if rel.is_relative() => b.join(rel),
                _ => rel.to_path_buf(),
            };
            let text = std::fs::read_to_string(&path).map_err(|e| CliError::input(&path, e))?;
            let name = path.file_stem().and_then(|s| s.to_str()).unwrap_or("custom").to_string();
            let bank = WaveletFilterBank::from_text(&name, &text).map_err(|e| CliError::input(&path, e))?;
            pipeline.wavelet = name;
            bank
        }
        None => WaveletFilterBank::by_name(&pipeline.wavelet).map_err(|e| CliError::invalid("config", e))?,
    };
    pipeline.validate().map_err(|e| CliError::invalid("config", e))?;
    Ok(ResolvedConfig { pipeline, bank })
}

pub fn load_plan(path: &Path) -> Result<PlanFile, CliError> {
    let file: PlanFile = read_json(path, "plan")?;
    file.plan.validate().map_err(|e| CliError::invalid("plan", e))?;
    file.pipeline.validate().map_err(|e| CliError::invalid("plan", e))?;
    Ok(file)
}
