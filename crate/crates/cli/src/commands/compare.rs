use std::fmt::Write as _;

use seld_core::features::{ClipFormat, FeatureConfig};
use seld_core::harness::{
    compare_losses, comparison_csv, comparison_svg, default_loss_configs, directional_verdict, prepare_clips,
    standardize, SeedData, TrainConfig,
};
use seld_core::model::ModelConfig;
use seld_core::synth::{generate_clip, SynthConfig};
use seld_core::Result;

use crate::settings;
use crate::Common;

/// Desk defaults for the comparison runs.
pub fn default_train_config() -> TrainConfig {
    TrainConfig { epochs: 150, augment: false, ..TrainConfig::desk() }
}

pub fn run(common: &Common) -> Result<()> {
    let mut known = settings::synth_keys();
    known.extend(settings::train_keys());
    known.extend(settings::model_keys());
    known.extend(["seeds", "train_clips", "test_clips"].map(String::from));
    let kv = settings::load(common, &known)?;
    let format = settings::format(common, &kv, ClipFormat::Foa)?;
    let synth = SynthConfig { format, ..SynthConfig::from_kv(&kv, &SynthConfig::default())? };
    let base = TrainConfig::from_kv(&kv, &default_train_config())?;
    let seeds: usize = kv.get_or("seeds", 3)?;
    let n_train: usize = kv.get_or("train_clips", 8)?;
    let n_test: usize = kv.get_or("test_clips", 4)?;
    let first = common.seed.unwrap_or(0);
    let model_cfg = ModelConfig {
        num_classes: synth.num_classes,
        in_channels: format.feature_channels(),
        ..ModelConfig::from_kv(&kv, &ModelConfig::desk(synth.num_classes, format.feature_channels()))?
    };
    let out = settings::out_dir(common)?;
    let parallel = settings::parallel(common);

    let mut data = Vec::with_capacity(seeds);
    for seed in first..first + seeds as u64 {
        let clips = (0..(n_train + n_test) as u64)
            .map(|i| generate_clip(seed, i, &synth))
            .collect::<Result<Vec<_>>>()?;
        let refs: Vec<_> = clips.iter().collect();
        let mut train = prepare_clips(&refs[..n_train], &FeatureConfig::default(), parallel)?;
        let mut test = prepare_clips(&refs[n_train..], &FeatureConfig::default(), parallel)?;
        let fit_on = train.clone();
        standardize(&fit_on, &mut [&mut train, &mut test])?;
        data.push(SeedData { seed, train, test });
    }
    let losses = default_loss_configs();
    eprintln!("{} runs of {} epochs ({} train / {} test clips per seed)", seeds * losses.len(), base.epochs, n_train, n_test);
    let runs = compare_losses(&data, &model_cfg, &base, &losses, parallel, &|msg| eprintln!("{msg}"))?;

    settings::write(&out.join("compare.csv"), &comparison_csv(&runs))?;
    settings::write(&out.join("compare.svg"), &comparison_svg(&runs))?;
    let v = directional_verdict(&runs)?;
    let mut text = String::from("seed,mse_sed_err,ce1000_sed_err,mse_doa_err,ce1000_doa_err\n");
    for (seed, ms, cs, md, cd) in &v.per_seed {
        writeln!(text, "{seed},{ms:.4},{cs:.4},{md:.2},{cd:.2}").unwrap();
    }
    writeln!(text, "# mse lower sed error in {}/{} seeds", v.sed_wins, v.per_seed.len()).unwrap();
    writeln!(text, "# doa errors within 2x in {}/{} seeds", v.doa_comparable, v.per_seed.len()).unwrap();
    writeln!(text, "# directional result holds: {}", v.holds()).unwrap();
    settings::write(&out.join("verdict.csv"), &text)?;
    print!("{text}");
    Ok(())
}
