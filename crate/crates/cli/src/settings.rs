use std::fs;
use std::path::{Path, PathBuf};

use seld_core::features::ClipFormat;
use seld_core::harness::TrainConfig;
use seld_core::kv::KvMap;
use seld_core::model::ModelConfig;
use seld_core::synth::SynthConfig;
use seld_core::{Result, SeldError};

use crate::Common;

pub fn synth_keys() -> Vec<String> {
    SynthConfig::default().to_kv().keys().map(String::from).collect()
}

pub fn train_keys() -> Vec<String> {
    TrainConfig::desk().to_kv().keys().map(String::from).collect()
}

/// Model keys a user may set; shape keys come from the data.
pub fn model_keys() -> Vec<String> {
    ModelConfig::default()
        .to_kv()
        .keys()
        .filter(|k| !matches!(*k, "num_classes" | "in_channels" | "input_frames" | "freq_bins"))
        .map(String::from)
        .collect()
}

/// Reads `--config` (empty when absent) and rejects keys outside `known`.
pub fn load(common: &Common, known: &[String]) -> Result<KvMap> {
    let Some(path) = &common.config else { return Ok(KvMap::new()) };
    let kv = KvMap::parse(&fs::read_to_string(path)?)?;
    let unknown: Vec<&str> = kv.keys().filter(|k| !known.iter().any(|n| n == k)).collect();
    if !unknown.is_empty() {
        return Err(SeldError::Config(format!("unknown keys in {}: {}", path.display(), unknown.join(", "))));
    }
    Ok(kv)
}

pub fn out_dir(common: &Common) -> Result<PathBuf> {
    let dir = common.out_dir.clone().ok_or_else(|| SeldError::Config("--out-dir is required".into()))?;
    fs::create_dir_all(&dir)?;
    Ok(dir)
}

pub fn parallel(common: &Common) -> bool {
    !common.deterministic
}

/// `--format` wins over the config; they must agree when both are given.
pub fn format(common: &Common, kv: &KvMap, default: ClipFormat) -> Result<ClipFormat> {
    let from_kv: Option<ClipFormat> = kv.get("format")?;
    match (common.format.map(ClipFormat::from), from_kv) {
        (Some(a), Some(b)) if a != b => Err(SeldError::Config(format!("--format {a} conflicts with format={b}"))),
        (Some(a), _) => Ok(a),
        (None, Some(b)) => Ok(b),
        (None, None) => Ok(default),
    }
}

pub fn write(path: &Path, text: &str) -> Result<()> {
    Ok(fs::write(path, text)?)
}
