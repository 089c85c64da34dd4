use std::fmt::Write as _;

use rand::seq::SliceRandom;

use crate::autodiff::{adam_step, AdamConfig, AdamState, Graph, Mode};
use crate::error::{Result, SeldError};
use crate::losses::{multitask_loss, LossBreakdown};
use crate::model::{ModelConfig, SeldModel};
use crate::rng::{derive, seeded};
use crate::tensor::Tensor;

use super::config::{lr_at, TrainConfig};
use super::data::{augment_segment, sample_segment, stack_batch, PreparedClip};
use super::eval::{evaluate_clips, EvalSummary};

/// Clip sets used by one training run. `monitors` are evaluated after every
/// epoch for reporting only.
pub struct TrainData<'a> {
    pub train: &'a [PreparedClip],
    pub val: Option<&'a [PreparedClip]>,
    pub monitors: Vec<(String, &'a [PreparedClip])>,
}

#[derive(Clone, Debug, PartialEq)]
pub struct EpochRecord {
    pub epoch: usize,
    pub lr: f64,
    /// Mean over the epoch's minibatches.
    pub train_loss: LossBreakdown,
    pub val: Option<EvalSummary>,
    pub monitors: Vec<(String, EvalSummary)>,
}

impl EpochRecord {
    pub fn val_seld(&self) -> Option<f64> {
        self.val.as_ref().and_then(EvalSummary::seld)
    }
}

pub struct TrainOutcome {
    /// Best-validation snapshot, or the final model without a validation set.
    pub model: SeldModel,
    pub final_model: SeldModel,
    pub adam: AdamState,
    pub best_epoch: Option<usize>,
    pub history: Vec<EpochRecord>,
}

/// Width of a training minibatch given the number of training clips.
fn batch_size(cfg: &TrainConfig, clips: usize) -> usize {
    cfg.minibatch.min(clips).max(1)
}

pub fn train(
    model_cfg: &ModelConfig,
    cfg: &TrainConfig,
    data: &TrainData<'_>,
    on_epoch: &mut dyn FnMut(&EpochRecord),
) -> Result<TrainOutcome> {
    cfg.validate()?;
    if data.train.is_empty() {
        return Err(SeldError::invalid("training split is empty"));
    }
    let model_cfg = ModelConfig { input_frames: cfg.segment_frames, scale_factor: cfg.scale_factor, ..model_cfg.clone() };
    let mut model = SeldModel::new(model_cfg, &mut seeded(cfg.seed))?;
    let mut adam = AdamState::new(&model.params);
    let mut rng = derive(cfg.seed, 1);
    let adam_cfg = AdamConfig::default();

    let mut history = Vec::with_capacity(cfg.epochs);
    let mut best: Option<(f64, usize, SeldModel)> = None;
    let bs = batch_size(cfg, data.train.len());
    for epoch in 0..cfg.epochs {
        let lr = lr_at(epoch, cfg);
        let mut order: Vec<usize> = (0..data.train.len()).collect();
        order.shuffle(&mut rng);
        let mut sum = LossBreakdown::default();
        let mut batches = 0usize;
        for chunk in order.chunks(bs) {
            let mut segs = Vec::with_capacity(chunk.len());
            for &i in chunk {
                let (mut f, l, _) = sample_segment(&data.train[i], cfg.segment_frames, &mut rng)?;
                if cfg.augment {
                    augment_segment(&mut f, &mut rng);
                }
                segs.push((f, l));
            }
            let (x, ya, yd) = stack_batch(&segs)?;
            let mut g = Graph::new();
            let (out, params) = model.forward(&mut g, &x, Mode::Train, &mut rng)?;
            let loss = multitask_loss(&mut g, out.activity, out.doa, &ya, &yd, &cfg.loss)?;
            let b = loss.breakdown(&g);
            if !b.total.is_finite() {
                return Err(SeldError::Divergence(format!("non-finite loss {} at epoch {epoch}", b.total)));
            }
            g.backward(loss.total)?;
            let grads: Vec<Tensor> = params
                .iter()
                .zip(&model.params)
                .map(|(&v, p)| g.grad(v).cloned().unwrap_or_else(|| Tensor::zeros(p.shape())))
                .collect();
            if let Some(i) = grads.iter().position(|t| !t.all_finite()) {
                return Err(SeldError::Divergence(format!("non-finite gradient for {} at epoch {epoch}", model.names[i])));
            }
            adam_step(&mut model.params, &grads, &mut adam, lr, &adam_cfg)?;
            if let Some(i) = model.params.iter().position(|t| !t.all_finite()) {
                return Err(SeldError::Divergence(format!("non-finite {} after update at epoch {epoch}", model.names[i])));
            }
            sum.total += b.total;
            sum.sed_term += b.sed_term;
            sum.doa_term += b.doa_term;
            batches += 1;
        }
        let n = batches as f64;
        let train_loss = LossBreakdown { total: sum.total / n, sed_term: sum.sed_term / n, doa_term: sum.doa_term / n };
        let val = data.val.map(|v| evaluate_clips(&model, v, &cfg.loss)).transpose()?;
        let monitors = data
            .monitors
            .iter()
            .map(|(name, clips)| Ok((name.clone(), evaluate_clips(&model, clips, &cfg.loss)?)))
            .collect::<Result<Vec<_>>>()?;
        let evals = val.iter().map(|s| ("validation", s)).chain(monitors.iter().map(|(n, s)| (n.as_str(), s)));
        for (name, s) in evals {
            if !s.loss.total.is_finite() {
                return Err(SeldError::Divergence(format!("non-finite {name} loss at epoch {epoch}")));
            }
        }
        let record = EpochRecord { epoch, lr, train_loss, val, monitors };
        if let Some(s) = record.val_seld() {
            if best.as_ref().is_none_or(|(b, _, _)| s < *b) {
                best = Some((s, epoch, model.clone()));
            }
        }
        on_epoch(&record);
        history.push(record);
    }
    let (retained, best_epoch) = match best {
        Some((_, e, m)) => (m, Some(e)),
        None => (model.clone(), None),
    };
    Ok(TrainOutcome { model: retained, final_model: model, adam, best_epoch, history })
}

pub const LOSS_CSV_HEADER: &str = "epoch,split,kind,w_ce,w_mse,sed_term,doa_term,total";
pub const METRIC_CSV_HEADER: &str = "epoch,lr,er20,f20_pct,le_cd_deg,lr_cd_pct,seld,frame_sed_err,frame_doa_err_deg";

fn fmt_f(v: f64) -> String {
    if v.is_finite() {
        format!("{v:.6e}")
    } else {
        "nan".into()
    }
}

/// Loss rows (train and, when present, validation) for every epoch.
pub fn loss_csv(history: &[EpochRecord], cfg: &TrainConfig) -> String {
    let mut s = String::new();
    writeln!(s, "{LOSS_CSV_HEADER}").unwrap();
    let (wc, wm) = cfg.loss.term_weights();
    for r in history {
        let mut row = |split: &str, b: &LossBreakdown| {
            writeln!(
                s,
                "{},{split},{},{wc},{wm},{},{},{}",
                r.epoch,
                cfg.loss.kind,
                fmt_f(b.sed_term),
                fmt_f(b.doa_term),
                fmt_f(b.total)
            )
            .unwrap();
        };
        row("train", &r.train_loss);
        if let Some(v) = &r.val {
            row("val", &v.loss);
        }
    }
    s
}

/// Validation metrics per epoch (empty body without a validation set).
pub fn metric_csv(history: &[EpochRecord]) -> String {
    let mut s = String::new();
    writeln!(s, "{METRIC_CSV_HEADER}").unwrap();
    for r in history {
        let Some(v) = &r.val else { continue };
        let m = v.segment.report().ok();
        let get = |f: fn(&crate::metrics::MetricReport) -> f64| m.as_ref().map_or(f64::NAN, f);
        writeln!(
            s,
            "{},{},{},{},{},{},{},{},{}",
            r.epoch,
            r.lr,
            fmt_f(get(|m| m.er20)),
            fmt_f(get(|m| 100.0 * m.f20)),
            fmt_f(get(|m| m.le_cd)),
            fmt_f(get(|m| 100.0 * m.lr_cd)),
            fmt_f(get(|m| m.seld)),
            fmt_f(v.frame.sed_error()),
            fmt_f(v.frame.doa_error())
        )
        .unwrap();
    }
    s
}
