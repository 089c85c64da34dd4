use std::fs::File;
use std::io::BufWriter;
use std::path::PathBuf;

use clap::Args;
use seld_core::features::io::write_features;
use seld_core::features::wav::read_wav;
use seld_core::features::{ClipFormat, FeatureConfig, FeatureExtractor};
use seld_core::synth::read_manifest;
use seld_core::{Result, SeldError};

use crate::settings;
use crate::Common;

#[derive(Args, Debug)]
pub struct FeaturizeArgs {
    /// Dataset directory written by synth-data.
    #[arg(long)]
    data_dir: Option<PathBuf>,
    /// Individual 4-channel wav files (format from --format).
    #[arg(long, num_args = 1..)]
    input: Vec<PathBuf>,
}

pub fn run(common: &Common, args: &FeaturizeArgs) -> Result<()> {
    let kv = settings::load(common, &[])?;
    let dir = settings::out_dir(common)?;
    let mut jobs: Vec<(String, PathBuf, ClipFormat)> = Vec::new();
    if let Some(data) = &args.data_dir {
        let info = super::dataset_info(data)?;
        for e in read_manifest(&data.join("manifest.csv"))? {
            jobs.push((e.clip_id.clone(), data.join(format!("{}.wav", e.clip_id)), info.format));
        }
    }
    let format = settings::format(common, &kv, ClipFormat::Foa)?;
    for p in &args.input {
        let id = p.file_stem().and_then(|s| s.to_str()).unwrap_or("clip").to_string();
        jobs.push((id, p.clone(), format));
    }
    if jobs.is_empty() {
        return Err(SeldError::Config("nothing to featurize: pass --data-dir or --input".into()));
    }
    let fx = FeatureExtractor::new(FeatureConfig::default())?;
    for (id, path, format) in jobs {
        let f = fx.extract(&read_wav(&path, format)?)?;
        let out = dir.join(format!("{id}.feat"));
        write_features(BufWriter::new(File::create(&out)?), &f)?;
        let [t, b, c] = f.shape();
        println!("{id}: {t}x{b}x{c} -> {}", out.display());
    }
    Ok(())
}
