use seld_core::features::ClipFormat;
use seld_core::synth::{dataset, write_dataset, Split, SynthConfig};
use seld_core::Result;
use seld_core::SeldError;

use super::DATASET_CONFIG;
use crate::settings;
use crate::Common;

pub fn run(common: &Common) -> Result<()> {
    let mut known = settings::synth_keys();
    known.extend(["clips".into(), "split".into()]);
    let kv = settings::load(common, &known)?;
    let format = settings::format(common, &kv, ClipFormat::Foa)?;
    let cfg = SynthConfig { format, ..SynthConfig::from_kv(&kv, &SynthConfig::default())? };
    let clips: usize = kv.get_or("clips", 20)?;
    let ratios: Vec<f64> = kv.get_list("split")?.unwrap_or_else(|| vec![0.6, 0.2, 0.2]);
    let ratios: [f64; 3] =
        ratios.try_into().map_err(|_| SeldError::Config("split needs three ratios: train,val,test".into()))?;
    let seed = common.seed.unwrap_or(0);
    let dir = settings::out_dir(common)?;

    let ds = dataset(seed, clips, ratios, &cfg)?;
    write_dataset(&ds, &dir)?;
    let mut info = cfg.to_kv();
    info.set("seed", seed);
    info.set("clips", clips);
    info.set_list("split", &ratios);
    settings::write(&dir.join(DATASET_CONFIG), &info.to_string())?;
    println!(
        "wrote {clips} {format} clips to {} (train {}, val {}, test {})",
        dir.display(),
        ds.count(Split::Train),
        ds.count(Split::Val),
        ds.count(Split::Test)
    );
    Ok(())
}
