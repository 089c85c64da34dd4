pub mod compare;
pub mod evaluate;
pub mod featurize;
pub mod gradcheck;
pub mod infer;
pub mod synth;
pub mod train;

use std::fs;
use std::path::{Path, PathBuf};

use rayon::prelude::*;
use seld_core::features::wav::read_wav;
use seld_core::features::{ClipFormat, FeatureConfig, FeatureExtractor};
use seld_core::harness::PreparedClip;
use seld_core::kv::KvMap;
use seld_core::metrics::{labels_from_events, read_event_csv};
use seld_core::synth::{read_manifest, Split, LABEL_HOP};
use seld_core::{Result, SeldError};

pub const DATASET_CONFIG: &str = "dataset.cfg";

/// Format and class count of a dataset directory.
pub struct DatasetInfo {
    pub format: ClipFormat,
    pub num_classes: usize,
}

pub fn dataset_info(dir: &Path) -> Result<DatasetInfo> {
    let kv = KvMap::parse(&fs::read_to_string(dir.join(DATASET_CONFIG))?)?;
    let format = kv.get("format")?.ok_or_else(|| SeldError::Format(format!("{DATASET_CONFIG} lacks format")))?;
    let num_classes =
        kv.get("num_classes")?.ok_or_else(|| SeldError::Format(format!("{DATASET_CONFIG} lacks num_classes")))?;
    Ok(DatasetInfo { format, num_classes })
}

/// Loads, featurizes and labels the clips of one split, in manifest order.
pub fn load_split(dir: &Path, split: Split, info: &DatasetInfo, parallel: bool) -> Result<Vec<PreparedClip>> {
    let ids: Vec<String> = read_manifest(&dir.join("manifest.csv"))?
        .into_iter()
        .filter(|e| e.split == split)
        .map(|e| {
            if e.format != info.format {
                return Err(SeldError::Format(format!("clip {} is {}, dataset is {}", e.clip_id, e.format, info.format)));
            }
            Ok(e.clip_id)
        })
        .collect::<Result<_>>()?;
    let fx = FeatureExtractor::new(FeatureConfig::default())?;
    let one = |id: &String| -> Result<PreparedClip> {
        let clip = read_wav(dir.join(format!("{id}.wav")), info.format)?;
        let frames = (clip.len() as f64 / (clip.sample_rate as f64 * LABEL_HOP)).round() as usize;
        let text = fs::read(dir.join(format!("{id}.csv")))?;
        let events = read_event_csv(&text[..])?.remove(id.as_str()).unwrap_or_default();
        let labels = labels_from_events(&events, frames, info.num_classes)?;
        Ok(PreparedClip { id: id.clone(), features: fx.extract(&clip)?, labels })
    };
    if parallel {
        ids.par_iter().map(one).collect()
    } else {
        ids.iter().map(one).collect()
    }
}

pub fn required<'a>(p: &'a Option<PathBuf>, flag: &str) -> Result<&'a PathBuf> {
    p.as_ref().ok_or_else(|| SeldError::Config(format!("--{flag} is required")))
}
