use std::path::PathBuf;

use clap::Args;
use seld_core::harness::{evaluate_clips, Checkpoint};
use seld_core::losses::LossConfig;
use seld_core::metrics::MetricReport;
use seld_core::synth::Split;
use seld_core::{Result, SeldError};

use super::{dataset_info, load_split, required};
use crate::settings;
use crate::Common;

#[derive(Args, Debug)]
pub struct EvaluateArgs {
    /// Directory holding model.cfg and model.ckpt.
    #[arg(long)]
    checkpoint: Option<PathBuf>,
    #[arg(long)]
    data_dir: Option<PathBuf>,
    #[arg(long, default_value = "test")]
    split: Split,
}

pub fn run(common: &Common, args: &EvaluateArgs) -> Result<()> {
    settings::load(common, &[])?;
    let ck = Checkpoint::load(required(&args.checkpoint, "checkpoint")?)?;
    let data_dir = required(&args.data_dir, "data-dir")?;
    let info = dataset_info(data_dir)?;
    if info.format != ck.format || info.num_classes != ck.model.config.num_classes {
        return Err(SeldError::Config(format!(
            "checkpoint is {} with {} classes, dataset is {} with {}",
            ck.format, ck.model.config.num_classes, info.format, info.num_classes
        )));
    }
    let mut clips = load_split(data_dir, args.split, &info, settings::parallel(common))?;
    if clips.is_empty() {
        return Err(SeldError::Invalid(format!("split {} is empty", args.split)));
    }
    for c in clips.iter_mut() {
        ck.standardizer.apply(&mut c.features)?;
    }
    let s = evaluate_clips(&ck.model, &clips, &LossConfig::mse_only())?;
    let report = s.segment.report()?;
    println!("{report}");
    println!("frame sed error {:.4}, frame doa error {:.2} deg", s.frame.sed_error(), s.frame.doa_error());
    if let Some(dir) = &common.out_dir {
        std::fs::create_dir_all(dir)?;
        let text = format!(
            "{},frame_sed_err,frame_doa_err_deg\n{},{:.6},{:.4}\n",
            MetricReport::CSV_HEADER,
            report.csv_row(),
            s.frame.sed_error(),
            s.frame.doa_error()
        );
        settings::write(&dir.join(format!("eval_{}.csv", args.split)), &text)?;
    }
    Ok(())
}
