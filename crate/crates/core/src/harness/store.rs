//! Checkpoint directories: `model.cfg` (key=value) and `model.ckpt` (records).

use std::fs;
use std::io::BufWriter;
use std::path::Path;

use crate::autodiff::checkpoint::{read_records, write_records, Record};
use crate::autodiff::AdamState;
use crate::error::{Result, SeldError};
use crate::features::ClipFormat;
use crate::kv::KvMap;
use crate::model::{ModelConfig, SeldModel};
use crate::tensor::Tensor;

use super::data::Standardizer;

pub const CONFIG_FILE: &str = "model.cfg";
pub const CHECKPOINT_FILE: &str = "model.ckpt";

#[derive(Clone, Debug, PartialEq)]
pub struct Checkpoint {
    pub model: SeldModel,
    pub standardizer: Standardizer,
    pub format: ClipFormat,
    pub adam: Option<AdamState>,
}

impl Checkpoint {
    pub fn save(&self, dir: &Path) -> Result<()> {
        fs::create_dir_all(dir)?;
        let mut kv = self.model.config.to_kv();
        kv.set("format", self.format);
        fs::write(dir.join(CONFIG_FILE), kv.to_string())?;
        let mut records = self.model.records();
        records.extend(self.standardizer.records());
        if let Some(adam) = &self.adam {
            for (name, (m, v)) in self.model.names.iter().zip(adam.m.iter().zip(&adam.v)) {
                records.push(Record::new(format!("adam.m.{name}"), m.clone()));
                records.push(Record::new(format!("adam.v.{name}"), v.clone()));
            }
            records.push(Record::new("adam.step", Tensor::scalar(adam.step as f64)));
        }
        let f = fs::File::create(dir.join(CHECKPOINT_FILE))?;
        write_records(BufWriter::new(f), &records)
    }

    pub fn load(dir: &Path) -> Result<Checkpoint> {
        let kv = KvMap::parse(&fs::read_to_string(dir.join(CONFIG_FILE))?)?;
        let config = ModelConfig::from_kv(&kv, &ModelConfig::default())?;
        let format: ClipFormat = kv
            .get("format")?
            .ok_or_else(|| SeldError::Format(format!("{CONFIG_FILE} lacks format")))?;
        if format.feature_channels() != config.in_channels {
            return Err(SeldError::Format(format!(
                "format {format} implies {} channels, config says {}",
                format.feature_channels(),
                config.in_channels
            )));
        }
        let records = read_records(fs::File::open(dir.join(CHECKPOINT_FILE))?)?;
        let model = SeldModel::from_records(config, &records)?;
        let standardizer = Standardizer::from_records(&records)?;
        let find = |n: &str| records.iter().find(|r| r.name == n).map(|r| r.tensor.clone());
        let adam = match find("adam.step") {
            None => None,
            Some(step) => {
                let mut m = Vec::new();
                let mut v = Vec::new();
                for name in &model.names {
                    m.push(find(&format!("adam.m.{name}")).ok_or_else(|| SeldError::Format(format!("missing adam.m.{name}")))?);
                    v.push(find(&format!("adam.v.{name}")).ok_or_else(|| SeldError::Format(format!("missing adam.v.{name}")))?);
                }
                Some(AdamState { m, v, step: step.item() as u64 })
            }
        };
        Ok(Checkpoint { model, standardizer, format, adam })
    }
}
