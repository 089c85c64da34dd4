//! Segment-based localization-aware detection and class-aware localization
//! metrics, and the combined SELD score.

mod csv;
pub mod hungarian;

pub use csv::{read_event_csv, write_event_csv, FrameEvent};

use std::fmt;

use crate::error::{Result, SeldError};
use crate::labels::LabelSequence;
use crate::model::Predictions;

pub const DOA_THRESHOLD_DEG: f64 = 20.0;
pub const ACTIVITY_THRESHOLD: f64 = 0.5;
pub const FRAMES_PER_SEGMENT: usize = 10;

/// Degrees between two non-zero directions.
pub fn angular_error(a: [f64; 3], b: [f64; 3]) -> Result<f64> {
    let na = norm(a);
    let nb = norm(b);
    if na == 0.0 || nb == 0.0 || !na.is_finite() || !nb.is_finite() {
        return Err(SeldError::invalid("angular error of a zero or non-finite vector"));
    }
    let dot = (a[0] * b[0] + a[1] * b[1] + a[2] * b[2]) / (na * nb);
    Ok(dot.clamp(-1.0, 1.0).acos().to_degrees())
}

fn norm(a: [f64; 3]) -> f64 {
    (a[0] * a[0] + a[1] * a[1] + a[2] * a[2]).sqrt()
}

fn normalized(a: [f64; 3]) -> Option<[f64; 3]> {
    let n = norm(a);
    (n > 0.0 && n.is_finite()).then(|| [a[0] / n, a[1] / n, a[2] / n])
}

/// Events of one one-second segment, as `(class, unit DOA)`.
#[derive(Clone, Debug, Default, PartialEq)]
pub struct SegmentEvents {
    pub entries: Vec<(usize, [f64; 3])>,
}

impl SegmentEvents {
    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }
}

/// Groups frame-level events into segments of `frames_per_segment` frames.
/// A class is active in a segment if any of its frames is; its DOA is the
/// normalized mean of the unit frame DOAs. Frames whose DOA is zero count
/// for activity but not for direction; if none has a direction the entry
/// falls back to +x.
pub fn segments_from_events(events: &[FrameEvent], total_frames: usize, frames_per_segment: usize) -> Vec<SegmentEvents> {
    let n_seg = total_frames.div_ceil(frames_per_segment);
    let mut acc: Vec<Vec<(usize, [f64; 3])>> = vec![Vec::new(); n_seg];
    for e in events {
        if e.frame >= total_frames {
            continue;
        }
        let seg = &mut acc[e.frame / frames_per_segment];
        let unit = normalized(e.doa).unwrap_or([0.0; 3]);
        match seg.iter_mut().find(|(c, _)| *c == e.class) {
            Some((_, sum)) => (0..3).for_each(|k| sum[k] += unit[k]),
            None => seg.push((e.class, unit)),
        }
    }
    acc.into_iter()
        .map(|mut seg| {
            seg.sort_by_key(|(c, _)| *c);
            SegmentEvents {
                entries: seg.into_iter().map(|(c, sum)| (c, normalized(sum).unwrap_or([1.0, 0.0, 0.0]))).collect(),
            }
        })
        .collect()
}

/// Frame events of thresholded predictions (`activity ≥ threshold`).
pub fn prediction_events(pred: &Predictions, threshold: f64) -> Vec<FrameEvent> {
    let mut out = Vec::new();
    for t in 0..pred.frames {
        for c in 0..pred.classes {
            if pred.activity_at(t, c) >= threshold {
                out.push(FrameEvent { frame: t, class: c, doa: pred.doa_at(t, c) });
            }
        }
    }
    out
}

pub fn label_events(labels: &LabelSequence) -> Vec<FrameEvent> {
    let mut out = Vec::new();
    for t in 0..labels.frames {
        for c in 0..labels.classes {
            if labels.is_active(t, c) {
                out.push(FrameEvent { frame: t, class: c, doa: labels.doa_at(t, c) });
            }
        }
    }
    out
}

/// Inverse of [`label_events`] for a clip of `frames` label frames.
pub fn labels_from_events(events: &[FrameEvent], frames: usize, classes: usize) -> Result<LabelSequence> {
    let mut labels = LabelSequence::empty(frames, classes);
    for e in events {
        if e.frame >= frames || e.class >= classes {
            return Err(SeldError::invalid(format!("event at frame {} class {} outside {frames}x{classes}", e.frame, e.class)));
        }
        if e.doa.iter().map(|v| v * v).sum::<f64>() == 0.0 {
            return Err(SeldError::invalid(format!("event at frame {} has a zero direction", e.frame)));
        }
        labels.set_active(e.frame, e.class, e.doa);
    }
    Ok(labels)
}

pub fn frames_to_segments(pred: &Predictions, threshold: f64) -> Vec<SegmentEvents> {
    segments_from_events(&prediction_events(pred, threshold), pred.frames, FRAMES_PER_SEGMENT)
}

pub fn labels_to_segments(labels: &LabelSequence) -> Vec<SegmentEvents> {
    segments_from_events(&label_events(labels), labels.frames, FRAMES_PER_SEGMENT)
}

/// Summable totals; metrics are ratios of these.
#[derive(Clone, Copy, Debug, Default, PartialEq)]
pub struct MetricCounts {
    pub tp: usize,
    pub fp: usize,
    pub fn_: usize,
    pub substitutions: usize,
    pub deletions: usize,
    pub insertions: usize,
    pub references: usize,
    pub loc_pairs: usize,
    pub loc_error_sum: f64,
}

impl MetricCounts {
    pub fn merge(&mut self, o: &MetricCounts) {
        self.tp += o.tp;
        self.fp += o.fp;
        self.fn_ += o.fn_;
        self.substitutions += o.substitutions;
        self.deletions += o.deletions;
        self.insertions += o.insertions;
        self.references += o.references;
        self.loc_pairs += o.loc_pairs;
        self.loc_error_sum += o.loc_error_sum;
    }

    /// Counts of one segment.
    pub fn from_segment(reference: &SegmentEvents, pred: &SegmentEvents) -> Result<MetricCounts> {
        let mut c = MetricCounts { references: reference.len(), ..Default::default() };
        let mut classes: Vec<usize> = reference.entries.iter().chain(&pred.entries).map(|e| e.0).collect();
        classes.sort_unstable();
        classes.dedup();
        let (mut seg_fp, mut seg_fn) = (0, 0);
        for class in classes {
            let r: Vec<[f64; 3]> = reference.entries.iter().filter(|e| e.0 == class).map(|e| e.1).collect();
            let p: Vec<[f64; 3]> = pred.entries.iter().filter(|e| e.0 == class).map(|e| e.1).collect();
            let mut cost = Vec::with_capacity(r.len() * p.len());
            for a in &r {
                for b in &p {
                    cost.push(angular_error(*a, *b)?);
                }
            }
            let pairs = hungarian::assign(&cost, r.len(), p.len());
            let mut tp = 0;
            for (i, j) in pairs.iter().copied() {
                let err = cost[i * p.len() + j];
                c.loc_pairs += 1;
                c.loc_error_sum += err;
                if err <= DOA_THRESHOLD_DEG {
                    tp += 1;
                }
            }
            c.tp += tp;
            seg_fp += p.len() - tp;
            seg_fn += r.len() - tp;
        }
        c.fp = seg_fp;
        c.fn_ = seg_fn;
        c.substitutions = seg_fp.min(seg_fn);
        c.deletions = seg_fn.saturating_sub(seg_fp);
        c.insertions = seg_fp.saturating_sub(seg_fn);
        Ok(c)
    }

    pub fn report(&self) -> Result<MetricReport> {
        if self.references == 0 {
            return Err(SeldError::EmptyReference);
        }
        let nref = self.references as f64;
        let er20 = (self.substitutions + self.deletions + self.insertions) as f64 / nref;
        let f20 = 2.0 * self.tp as f64 / (2 * self.tp + self.fp + self.fn_) as f64;
        let le_cd = if self.loc_pairs == 0 { 180.0 } else { self.loc_error_sum / self.loc_pairs as f64 };
        let lr_cd = self.loc_pairs as f64 / nref;
        let seld = seld_combine(er20, f20, le_cd, lr_cd)?;
        Ok(MetricReport { er20, f20, le_cd, lr_cd, seld, counts: *self })
    }
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct MetricReport {
    pub er20: f64,
    pub f20: f64,
    pub le_cd: f64,
    pub lr_cd: f64,
    pub seld: f64,
    pub counts: MetricCounts,
}

impl MetricReport {
    pub const CSV_HEADER: &'static str = "er20,f20_pct,le_cd_deg,lr_cd_pct,seld";

    pub fn csv_row(&self) -> String {
        format!("{:.4},{:.2},{:.2},{:.2},{:.4}", self.er20, 100.0 * self.f20, self.le_cd, 100.0 * self.lr_cd, self.seld)
    }
}

impl fmt::Display for MetricReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(f, "ER20      {:.3}", self.er20)?;
        writeln!(f, "F20       {:.1}%", 100.0 * self.f20)?;
        writeln!(f, "LE_CD     {:.1} deg", self.le_cd)?;
        writeln!(f, "LR_CD     {:.1}%", 100.0 * self.lr_cd)?;
        write!(f, "SELD      {:.3}", self.seld)
    }
}

/// Micro-averaged metrics over aligned segment sequences.
pub fn evaluate(reference: &[SegmentEvents], pred: &[SegmentEvents]) -> Result<MetricReport> {
    evaluate_counts(reference, pred)?.report()
}

pub fn evaluate_counts(reference: &[SegmentEvents], pred: &[SegmentEvents]) -> Result<MetricCounts> {
    if reference.len() != pred.len() {
        return Err(SeldError::invalid(format!(
            "{} reference segments vs {} predicted",
            reference.len(),
            pred.len()
        )));
    }
    let mut total = MetricCounts::default();
    for (r, p) in reference.iter().zip(pred) {
        total.merge(&MetricCounts::from_segment(r, p)?);
    }
    Ok(total)
}

/// `(er + (1 − f) + le/180 + (1 − lr)) / 4`
pub fn seld_combine(er: f64, f: f64, le_deg: f64, lr: f64) -> Result<f64> {
    if !(er.is_finite() && er >= 0.0) {
        return Err(SeldError::invalid(format!("error rate {er} must be finite and nonnegative")));
    }
    for (name, v) in [("F-score", f), ("localization recall", lr)] {
        if !(0.0..=1.0).contains(&v) {
            return Err(SeldError::invalid(format!("{name} {v} outside [0, 1]")));
        }
    }
    if !(0.0..=180.0).contains(&le_deg) {
        return Err(SeldError::invalid(format!("localization error {le_deg} outside [0, 180]")));
    }
    Ok((er + (1.0 - f) + le_deg / 180.0 + (1.0 - lr)) / 4.0)
}
