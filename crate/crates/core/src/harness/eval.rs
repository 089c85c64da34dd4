use crate::autodiff::Graph;
use crate::error::{Result, SeldError};
use crate::features::FeatureTensor;
use crate::labels::{stack_labels, LabelSequence};
use crate::losses::{multitask_loss, LossBreakdown, LossConfig};
use crate::metrics::{angular_error, frames_to_segments, labels_to_segments, MetricCounts, ACTIVITY_THRESHOLD};
use crate::model::{Predictions, SeldModel};
use crate::tensor::Tensor;

use super::data::{stack_features, PreparedClip, FRAMES_PER_LABEL};

/// Inference window in input frames (2 s).
pub const INFER_WINDOW: usize = 100;
const WINDOWS_PER_BATCH: usize = 16;

/// Start frames of the non-overlapping windows covering `frames`.
pub fn window_starts(frames: usize, window: usize) -> Vec<usize> {
    (0..frames.div_ceil(window)).map(|k| k * window).collect()
}

/// Predictions for a whole clip from non-overlapping windows; the last
/// window is zero-padded and its output trimmed.
pub fn predict_clip(model: &SeldModel, features: &FeatureTensor, window: usize) -> Result<Predictions> {
    if window % model.config.time_pool() != 0 {
        return Err(SeldError::config(format!("window {window} not divisible by {}", model.config.time_pool())));
    }
    if features.channels != model.config.in_channels || features.bins != model.config.freq_bins {
        return Err(SeldError::shape(format!(
            "features are {}x{} per frame, model expects {}x{}",
            features.bins, features.channels, model.config.freq_bins, model.config.in_channels
        )));
    }
    let out_frames = features.frames.div_ceil(FRAMES_PER_LABEL);
    let mut all = Predictions::zeros(0, model.config.num_classes);
    let starts = window_starts(features.frames, window);
    for chunk in starts.chunks(WINDOWS_PER_BATCH) {
        let crops: Vec<FeatureTensor> = chunk.iter().map(|&s| features.crop(s, window)).collect();
        let x = stack_features(&crops.iter().collect::<Vec<_>>())?;
        for p in model.predict(&x)? {
            let keep = p.frames.min(out_frames - all.frames);
            all.extend(&p, keep);
        }
    }
    Ok(all)
}

/// Frame-level detection error (substitutions, deletions, insertions over
/// reference count, threshold 0.5, direction ignored) and mean angular DOA
/// error over reference-active cells.
#[derive(Clone, Copy, Debug, Default, PartialEq)]
pub struct FrameErrors {
    pub substitutions: usize,
    pub deletions: usize,
    pub insertions: usize,
    pub references: usize,
    pub doa_error_sum: f64,
    pub doa_cells: usize,
}

impl FrameErrors {
    pub fn measure(pred: &Predictions, labels: &LabelSequence) -> Result<FrameErrors> {
        if pred.classes != labels.classes {
            return Err(SeldError::shape("prediction and label class counts differ"));
        }
        let mut e = FrameErrors::default();
        for t in 0..labels.frames.min(pred.frames) {
            let (mut fp, mut fn_) = (0usize, 0usize);
            for c in 0..labels.classes {
                let r = labels.is_active(t, c);
                let p = pred.activity_at(t, c) >= ACTIVITY_THRESHOLD;
                match (r, p) {
                    (true, false) => fn_ += 1,
                    (false, true) => fp += 1,
                    _ => {}
                }
                if r {
                    e.references += 1;
                    // a zero prediction has no direction: count it as orthogonal
                    e.doa_error_sum += angular_error(pred.doa_at(t, c), labels.doa_at(t, c)).unwrap_or(90.0);
                    e.doa_cells += 1;
                }
            }
            e.substitutions += fp.min(fn_);
            e.deletions += fn_.saturating_sub(fp);
            e.insertions += fp.saturating_sub(fn_);
        }
        Ok(e)
    }

    pub fn merge(&mut self, o: &FrameErrors) {
        self.substitutions += o.substitutions;
        self.deletions += o.deletions;
        self.insertions += o.insertions;
        self.references += o.references;
        self.doa_error_sum += o.doa_error_sum;
        self.doa_cells += o.doa_cells;
    }

    /// NaN when there are no reference frames.
    pub fn sed_error(&self) -> f64 {
        (self.substitutions + self.deletions + self.insertions) as f64 / self.references as f64
    }

    pub fn doa_error(&self) -> f64 {
        self.doa_error_sum / self.doa_cells as f64
    }
}

/// Everything measured on one set of clips with a fixed model.
#[derive(Clone, Debug, PartialEq)]
pub struct EvalSummary {
    pub frame: FrameErrors,
    pub segment: MetricCounts,
    /// Loss of the configured kind.
    pub loss: LossBreakdown,
    /// Homogeneous MSE terms.
    pub mse: LossBreakdown,
    /// CE terms with unit weights.
    pub ce: LossBreakdown,
}

impl EvalSummary {
    pub fn seld(&self) -> Option<f64> {
        self.segment.report().ok().map(|r| r.seld)
    }
}

fn loss_of(pred: &Predictions, labels: &LabelSequence, cfg: &LossConfig) -> Result<LossBreakdown> {
    let (ya, yd) = stack_labels(&[labels])?;
    let n = labels.frames;
    let mut g = Graph::new();
    let a = g.constant(Tensor::new(&[1, n, pred.classes], pred.activity[..n * pred.classes].to_vec())?);
    let d = g.constant(Tensor::new(&[1, n, pred.classes, 3], pred.doa[..n * pred.classes * 3].to_vec())?);
    Ok(multitask_loss(&mut g, a, d, &ya, &yd, cfg)?.breakdown(&g))
}

fn add_weighted(acc: &mut LossBreakdown, b: &LossBreakdown, w: f64) {
    acc.total += w * b.total;
    acc.sed_term += w * b.sed_term;
    acc.doa_term += w * b.doa_term;
}

/// Runs inference on every clip and accumulates metrics and losses.
/// Losses are frame-weighted averages over clips.
pub fn evaluate_clips(model: &SeldModel, clips: &[PreparedClip], loss: &LossConfig) -> Result<EvalSummary> {
    let mut s = EvalSummary {
        frame: FrameErrors::default(),
        segment: MetricCounts::default(),
        loss: LossBreakdown::default(),
        mse: LossBreakdown::default(),
        ce: LossBreakdown::default(),
    };
    let total_frames: usize = clips.iter().map(|c| c.labels.frames).sum();
    for clip in clips {
        let pred = predict_clip(model, &clip.features, INFER_WINDOW)?;
        if pred.frames < clip.labels.frames {
            return Err(SeldError::shape(format!("clip {}: fewer predicted frames than labels", clip.id)));
        }
        let pred = trim(&pred, clip.labels.frames);
        s.frame.merge(&FrameErrors::measure(&pred, &clip.labels)?);
        let counts = crate::metrics::evaluate_counts(&labels_to_segments(&clip.labels), &frames_to_segments(&pred, ACTIVITY_THRESHOLD))?;
        s.segment.merge(&counts);
        let w = clip.labels.frames as f64 / total_frames as f64;
        add_weighted(&mut s.loss, &loss_of(&pred, &clip.labels, loss)?, w);
        add_weighted(&mut s.mse, &loss_of(&pred, &clip.labels, &LossConfig::mse_only())?, w);
        add_weighted(&mut s.ce, &loss_of(&pred, &clip.labels, &LossConfig::ce_mse(1.0, 1.0))?, w);
    }
    Ok(s)
}

fn trim(p: &Predictions, frames: usize) -> Predictions {
    Predictions {
        frames,
        classes: p.classes,
        activity: p.activity[..frames * p.classes].to_vec(),
        doa: p.doa[..frames * p.classes * 3].to_vec(),
    }
}
