use rand::Rng;

use crate::autodiff::checkpoint::Record;
use crate::error::{Result, SeldError};
use crate::features::{FeatureConfig, FeatureExtractor, FeatureTensor};
use crate::labels::{stack_labels, LabelSequence};
use crate::synth::SynthClip;
use crate::tensor::Tensor;

/// Input feature frames per output (label) frame.
pub const FRAMES_PER_LABEL: usize = 5;

/// Feature clip paired with its labels, ready for training or evaluation.
#[derive(Clone, Debug, PartialEq)]
pub struct PreparedClip {
    pub id: String,
    pub features: FeatureTensor,
    pub labels: LabelSequence,
}

/// Featurizes clips; parallel across clips when `parallel` is set and the
/// crate was built with it. Output order and values do not depend on it.
pub fn prepare_clips(clips: &[&SynthClip], cfg: &FeatureConfig, parallel: bool) -> Result<Vec<PreparedClip>> {
    let fx = FeatureExtractor::new(cfg.clone())?;
    let one = |c: &&SynthClip| -> Result<PreparedClip> {
        Ok(PreparedClip { id: c.id.clone(), features: fx.extract(&c.clip)?, labels: c.labels.clone() })
    };
    #[cfg(feature = "parallel")]
    if parallel {
        use rayon::prelude::*;
        return clips.par_iter().map(one).collect();
    }
    let _ = parallel;
    clips.iter().map(one).collect()
}

/// Per-channel z-score statistics.
#[derive(Clone, Debug, PartialEq)]
pub struct Standardizer {
    pub mean: Vec<f64>,
    pub std: Vec<f64>,
}

impl Standardizer {
    pub fn identity(channels: usize) -> Self {
        Standardizer { mean: vec![0.0; channels], std: vec![1.0; channels] }
    }

    pub fn fit(items: &[&FeatureTensor]) -> Result<Self> {
        let first = items.first().ok_or_else(|| SeldError::invalid("no features to fit standardization on"))?;
        let c = first.channels;
        if items.iter().any(|f| f.channels != c) {
            return Err(SeldError::shape("feature channel counts differ"));
        }
        let mut sum = vec![0.0; c];
        let mut sq = vec![0.0; c];
        let mut n = 0usize;
        for f in items {
            for cell in f.data.chunks_exact(c) {
                for k in 0..c {
                    sum[k] += cell[k];
                    sq[k] += cell[k] * cell[k];
                }
            }
            n += f.frames * f.bins;
        }
        let mean: Vec<f64> = sum.iter().map(|s| s / n as f64).collect();
        let std = sq
            .iter()
            .zip(&mean)
            .map(|(s, m)| {
                let var = (s / n as f64 - m * m).max(0.0);
                if var.sqrt() > 1e-8 {
                    var.sqrt()
                } else {
                    1.0
                }
            })
            .collect();
        Ok(Standardizer { mean, std })
    }

    pub fn apply(&self, f: &mut FeatureTensor) -> Result<()> {
        let c = self.mean.len();
        if f.channels != c {
            return Err(SeldError::shape(format!("standardizer has {c} channels, features {}", f.channels)));
        }
        for cell in f.data.chunks_exact_mut(c) {
            for k in 0..c {
                cell[k] = (cell[k] - self.mean[k]) / self.std[k];
            }
        }
        Ok(())
    }

    pub fn records(&self) -> Vec<Record> {
        let c = self.mean.len();
        vec![
            Record::new("norm.mean", Tensor::new(&[c], self.mean.clone()).expect("shape")),
            Record::new("norm.std", Tensor::new(&[c], self.std.clone()).expect("shape")),
        ]
    }

    pub fn from_records(records: &[Record]) -> Result<Self> {
        let get = |name: &str| {
            records
                .iter()
                .find(|r| r.name == name)
                .map(|r| r.tensor.data().to_vec())
                .ok_or_else(|| SeldError::Format(format!("checkpoint lacks {name}")))
        };
        let (mean, std) = (get("norm.mean")?, get("norm.std")?);
        if mean.len() != std.len() || std.iter().any(|&s| s <= 0.0) {
            return Err(SeldError::Format("bad standardization records".into()));
        }
        Ok(Standardizer { mean, std })
    }
}

/// Fits on `train` and standardizes every clip in `sets` in place.
pub fn standardize(train: &[PreparedClip], sets: &mut [&mut Vec<PreparedClip>]) -> Result<Standardizer> {
    let s = Standardizer::fit(&train.iter().map(|c| &c.features).collect::<Vec<_>>())?;
    for set in sets.iter_mut() {
        for c in set.iter_mut() {
            s.apply(&mut c.features)?;
        }
    }
    Ok(s)
}

/// Random crop of `frames` input frames starting on a label-frame boundary,
/// with the aligned label crop. Returns the offset as well.
pub fn sample_segment<R: Rng + ?Sized>(
    clip: &PreparedClip,
    frames: usize,
    rng: &mut R,
) -> Result<(FeatureTensor, LabelSequence, usize)> {
    if frames % FRAMES_PER_LABEL != 0 {
        return Err(SeldError::config(format!("segment length {frames} not a multiple of {FRAMES_PER_LABEL}")));
    }
    if clip.features.frames < frames {
        return Err(SeldError::invalid(format!(
            "clip {} too short: {} frames, segment needs {frames}",
            clip.id, clip.features.frames
        )));
    }
    let positions = (clip.features.frames - frames) / FRAMES_PER_LABEL;
    let offset = rng.gen_range(0..=positions) * FRAMES_PER_LABEL;
    let features = clip.features.crop(offset, frames);
    let labels = clip.labels.crop(offset / FRAMES_PER_LABEL, frames / FRAMES_PER_LABEL);
    Ok((features, labels, offset))
}

/// One time mask (width up to 10% of the frames) and one frequency mask
/// (width up to 8 bands), zeroed across all channels.
pub fn augment_segment<R: Rng + ?Sized>(f: &mut FeatureTensor, rng: &mut R) {
    let tw = rng.gen_range(0..=f.frames / 10);
    let t0 = rng.gen_range(0..=f.frames - tw);
    let fw = rng.gen_range(0..=8.min(f.bins));
    let f0 = rng.gen_range(0..=f.bins - fw);
    let (bins, ch) = (f.bins, f.channels);
    for t in 0..f.frames {
        for b in 0..bins {
            if (t0..t0 + tw).contains(&t) || (f0..f0 + fw).contains(&b) {
                let i = (t * bins + b) * ch;
                f.data[i..i + ch].iter_mut().for_each(|v| *v = 0.0);
            }
        }
    }
}

/// `[N, T, F, C]` input tensor from equally shaped feature segments.
pub fn stack_features(items: &[&FeatureTensor]) -> Result<Tensor> {
    let first = items.first().ok_or_else(|| SeldError::invalid("empty feature batch"))?;
    let shape = first.shape();
    if items.iter().any(|f| f.shape() != shape) {
        return Err(SeldError::shape("feature segments in a batch differ in shape"));
    }
    let data: Vec<f64> = items.iter().flat_map(|f| f.data.iter().copied()).collect();
    Tensor::new(&[items.len(), shape[0], shape[1], shape[2]], data)
}

/// Batch tensors `(input, activity, doa)`.
pub fn stack_batch(segments: &[(FeatureTensor, LabelSequence)]) -> Result<(Tensor, Tensor, Tensor)> {
    let x = stack_features(&segments.iter().map(|s| &s.0).collect::<Vec<_>>())?;
    let (a, d) = stack_labels(&segments.iter().map(|s| &s.1).collect::<Vec<_>>())?;
    Ok((x, a, d))
}
