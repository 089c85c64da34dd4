use std::fs::File;
use std::io::BufWriter;
use std::path::PathBuf;

use clap::Args;
use seld_core::features::wav::read_wav;
use seld_core::features::{FeatureConfig, FeatureExtractor};
use seld_core::harness::{predict_clip, Checkpoint, PreparedClip, INFER_WINDOW};
use seld_core::metrics::{prediction_events, write_event_csv, ACTIVITY_THRESHOLD};
use seld_core::synth::Split;
use seld_core::{Result, SeldError};

use super::{dataset_info, load_split, required};
use crate::settings;
use crate::Common;

#[derive(Args, Debug)]
pub struct InferArgs {
    #[arg(long)]
    checkpoint: Option<PathBuf>,
    /// Wav files in the checkpoint's format.
    #[arg(long, num_args = 1..)]
    input: Vec<PathBuf>,
    /// Dataset directory; predicts every clip of --split.
    #[arg(long)]
    data_dir: Option<PathBuf>,
    #[arg(long, default_value = "test")]
    split: Split,
}

pub fn run(common: &Common, args: &InferArgs) -> Result<()> {
    let kv = settings::load(common, &["threshold".to_string()])?;
    let threshold: f64 = kv.get_or("threshold", ACTIVITY_THRESHOLD)?;
    let ck = Checkpoint::load(required(&args.checkpoint, "checkpoint")?)?;
    let format = settings::format(common, &kv, ck.format)?;
    if format != ck.format {
        return Err(SeldError::Config(format!("checkpoint expects {} input", ck.format)));
    }
    let out = settings::out_dir(common)?;
    let mut clips: Vec<(String, seld_core::features::FeatureTensor)> = Vec::new();
    if let Some(dir) = &args.data_dir {
        let info = dataset_info(dir)?;
        for PreparedClip { id, features, .. } in load_split(dir, args.split, &info, settings::parallel(common))? {
            clips.push((id, features));
        }
    }
    let fx = FeatureExtractor::new(FeatureConfig::default())?;
    for p in &args.input {
        let id = p.file_stem().and_then(|s| s.to_str()).unwrap_or("clip").to_string();
        clips.push((id, fx.extract(&read_wav(p, format)?)?));
    }
    if clips.is_empty() {
        return Err(SeldError::Config("nothing to infer: pass --input or --data-dir".into()));
    }
    for (id, mut features) in clips {
        ck.standardizer.apply(&mut features)?;
        let pred = predict_clip(&ck.model, &features, INFER_WINDOW)?;
        let events = prediction_events(&pred, threshold);
        let path = out.join(format!("{id}_pred.csv"));
        write_event_csv(BufWriter::new(File::create(&path)?), &id, &events, true)?;
        println!("{id}: {} frames, {} active cells -> {}", pred.frames, events.len(), path.display());
    }
    Ok(())
}
