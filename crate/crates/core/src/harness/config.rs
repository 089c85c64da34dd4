use crate::error::{Result, SeldError};
use crate::kv::KvMap;
use crate::losses::LossConfig;

#[derive(Clone, Debug, PartialEq)]
pub struct TrainConfig {
    pub epochs: usize,
    pub minibatch: usize,
    /// Input frames per training segment.
    pub segment_frames: usize,
    pub lr_init: f64,
    pub warmup_epochs: usize,
    pub warmup_lr: f64,
    pub decay_rate: f64,
    pub decay_epochs: Vec<usize>,
    pub loss: LossConfig,
    pub seed: u64,
    pub augment: bool,
    pub scale_factor: usize,
}

impl Default for TrainConfig {
    fn default() -> Self {
        TrainConfig::full()
    }
}

impl TrainConfig {
    /// Full-scale schedule.
    pub fn full() -> Self {
        TrainConfig {
            epochs: 10_000,
            minibatch: 64,
            segment_frames: 600,
            lr_init: 2e-4,
            warmup_epochs: 10,
            warmup_lr: 2e-5,
            decay_rate: 0.8,
            decay_epochs: vec![200, 600, 1000],
            loss: LossConfig::mse_only(),
            seed: 0,
            augment: true,
            scale_factor: 1,
        }
    }

    /// CPU-sized preset: narrow model, 2 s segments, short schedule.
    pub fn desk() -> Self {
        TrainConfig {
            epochs: 300,
            minibatch: 8,
            segment_frames: 100,
            lr_init: 2e-3,
            warmup_epochs: 10,
            warmup_lr: 2e-4,
            decay_rate: 0.8,
            decay_epochs: vec![200, 600, 1000],
            scale_factor: 8,
            ..TrainConfig::full()
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.minibatch == 0 || self.segment_frames == 0 || self.scale_factor == 0 {
            return Err(SeldError::config("minibatch, segment_frames and scale_factor must be positive"));
        }
        if !(self.warmup_lr < self.lr_init) || self.warmup_lr < 0.0 || !self.lr_init.is_finite() {
            return Err(SeldError::config("need 0 <= warmup_lr < lr_init"));
        }
        if self.decay_epochs.windows(2).any(|w| w[0] >= w[1]) {
            return Err(SeldError::config("decay_epochs must be strictly increasing"));
        }
        if !(self.decay_rate > 0.0 && self.decay_rate <= 1.0) {
            return Err(SeldError::config("decay_rate must be in (0, 1]"));
        }
        self.loss.validate()
    }

    pub fn to_kv(&self) -> KvMap {
        let mut kv = KvMap::new();
        kv.set("epochs", self.epochs);
        kv.set("minibatch", self.minibatch);
        kv.set("segment_frames", self.segment_frames);
        kv.set("lr_init", self.lr_init);
        kv.set("warmup_epochs", self.warmup_epochs);
        kv.set("warmup_lr", self.warmup_lr);
        kv.set("decay_rate", self.decay_rate);
        kv.set_list("decay_epochs", &self.decay_epochs);
        self.loss.write_kv(&mut kv);
        kv.set("seed", self.seed);
        kv.set("augment", self.augment);
        kv.set("scale_factor", self.scale_factor);
        kv
    }

    pub fn from_kv(kv: &KvMap, base: &TrainConfig) -> Result<Self> {
        let cfg = TrainConfig {
            epochs: kv.get_or("epochs", base.epochs)?,
            minibatch: kv.get_or("minibatch", base.minibatch)?,
            segment_frames: kv.get_or("segment_frames", base.segment_frames)?,
            lr_init: kv.get_or("lr_init", base.lr_init)?,
            warmup_epochs: kv.get_or("warmup_epochs", base.warmup_epochs)?,
            warmup_lr: kv.get_or("warmup_lr", base.warmup_lr)?,
            decay_rate: kv.get_or("decay_rate", base.decay_rate)?,
            decay_epochs: kv.get_list("decay_epochs")?.unwrap_or_else(|| base.decay_epochs.clone()),
            loss: LossConfig::from_kv(kv, &base.loss)?,
            seed: kv.get_or("seed", base.seed)?,
            augment: kv.get_or("augment", base.augment)?,
            scale_factor: kv.get_or("scale_factor", base.scale_factor)?,
        };
        cfg.validate()?;
        Ok(cfg)
    }
}

/// Learning rate for a 0-based epoch: `warmup_lr` during warmup, then
/// `lr_init` times `decay_rate` per milestone reached. Rounded to 12
/// significant digits so that schedule values are exact decimals.
pub fn lr_at(epoch: usize, cfg: &TrainConfig) -> f64 {
    if epoch < cfg.warmup_epochs {
        return cfg.warmup_lr;
    }
    let passed = cfg.decay_epochs.iter().filter(|&&m| epoch >= m).count();
    let lr = cfg.lr_init * cfg.decay_rate.powi(passed as i32);
    format!("{lr:.11e}").parse().expect("formatted float parses")
}
