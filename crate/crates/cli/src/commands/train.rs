use std::path::PathBuf;

use clap::Args;
use seld_core::harness::{
    loss_csv, metric_csv, standardize, train, Checkpoint, EpochRecord, TrainConfig, TrainData,
};
use seld_core::model::ModelConfig;
use seld_core::synth::Split;
use seld_core::Result;

use super::{dataset_info, load_split, required};
use crate::settings;
use crate::Common;

#[derive(Args, Debug)]
pub struct TrainArgs {
    /// Dataset directory written by synth-data.
    #[arg(long)]
    data_dir: Option<PathBuf>,
    /// Print a progress line every this many epochs.
    #[arg(long, default_value_t = 10)]
    log_every: usize,
}

pub fn run(common: &Common, args: &TrainArgs) -> Result<()> {
    let mut known = settings::train_keys();
    known.extend(settings::model_keys());
    known.push("format".into());
    let kv = settings::load(common, &known)?;
    let data_dir = required(&args.data_dir, "data-dir")?;
    let info = dataset_info(data_dir)?;
    let format = settings::format(common, &kv, info.format)?;
    if format != info.format {
        return Err(seld_core::SeldError::Config(format!("--format {format} but dataset is {}", info.format)));
    }
    let mut cfg = TrainConfig::from_kv(&kv, &TrainConfig::desk())?;
    if let Some(seed) = common.seed {
        cfg.seed = seed;
    }
    let base = ModelConfig::desk(info.num_classes, format.feature_channels());
    let model_cfg = ModelConfig {
        num_classes: info.num_classes,
        in_channels: format.feature_channels(),
        ..ModelConfig::from_kv(&kv, &base)?
    };
    let out = settings::out_dir(common)?;
    let parallel = settings::parallel(common);

    let mut train_set = load_split(data_dir, Split::Train, &info, parallel)?;
    let mut val_set = load_split(data_dir, Split::Val, &info, parallel)?;
    let fit_on = train_set.clone();
    let norm = standardize(&fit_on, &mut [&mut train_set, &mut val_set])?;
    drop(fit_on);
    eprintln!("training on {} clips, validating on {}", train_set.len(), val_set.len());

    let data = TrainData {
        train: &train_set,
        val: (!val_set.is_empty()).then_some(val_set.as_slice()),
        monitors: vec![],
    };
    let every = args.log_every.max(1);
    let mut log = |r: &EpochRecord| {
        if r.epoch % every == 0 || r.epoch + 1 == cfg.epochs {
            let val = r.val_seld().map_or(String::new(), |s| format!(" val seld {s:.3}"));
            eprintln!("epoch {:>5} lr {:.3e} loss {:.5}{val}", r.epoch, r.lr, r.train_loss.total);
        }
    };
    let outcome = train(&model_cfg, &cfg, &data, &mut log)?;

    settings::write(&out.join("train.cfg"), &cfg.to_kv().to_string())?;
    settings::write(&out.join("loss.csv"), &loss_csv(&outcome.history, &cfg))?;
    if data.val.is_some() {
        settings::write(&out.join("metrics.csv"), &metric_csv(&outcome.history))?;
    }
    Checkpoint { model: outcome.model, standardizer: norm.clone(), format, adam: None }.save(&out)?;
    Checkpoint { model: outcome.final_model, standardizer: norm, format, adam: Some(outcome.adam) }
        .save(&out.join("last"))?;
    match outcome.best_epoch {
        Some(e) => println!("best validation epoch {e}; checkpoint in {}", out.display()),
        None => println!("final-epoch checkpoint in {}", out.display()),
    }
    Ok(())
}
