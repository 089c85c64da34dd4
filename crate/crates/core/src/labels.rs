//! Frame-level ground truth on the 100 ms output grid.

use crate::error::{Result, SeldError};
use crate::tensor::Tensor;

#[derive(Clone, Debug, PartialEq)]
pub struct LabelSequence {
    pub frames: usize,
    pub classes: usize,
    /// `frames × classes`, entries 0 or 1.
    pub activity: Vec<f64>,
    /// `frames × classes × 3`, unit vectors where active and zero elsewhere.
    pub doa: Vec<f64>,
}

impl LabelSequence {
    pub fn empty(frames: usize, classes: usize) -> Self {
        LabelSequence { frames, classes, activity: vec![0.0; frames * classes], doa: vec![0.0; frames * classes * 3] }
    }

    pub fn is_active(&self, t: usize, c: usize) -> bool {
        self.activity[t * self.classes + c] > 0.5
    }

    pub fn doa_at(&self, t: usize, c: usize) -> [f64; 3] {
        let i = (t * self.classes + c) * 3;
        [self.doa[i], self.doa[i + 1], self.doa[i + 2]]
    }

    /// Marks class `c` active at frame `t`; `dir` is normalized.
    pub fn set_active(&mut self, t: usize, c: usize, dir: [f64; 3]) {
        let n = (dir[0] * dir[0] + dir[1] * dir[1] + dir[2] * dir[2]).sqrt();
        self.activity[t * self.classes + c] = 1.0;
        let i = (t * self.classes + c) * 3;
        for k in 0..3 {
            self.doa[i + k] = dir[k] / n;
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.activity.len() != self.frames * self.classes || self.doa.len() != 3 * self.activity.len() {
            return Err(SeldError::shape("label buffers do not match frames × classes"));
        }
        for (i, &a) in self.activity.iter().enumerate() {
            if a != 0.0 && a != 1.0 {
                return Err(SeldError::invalid(format!("activity target {a} is not 0 or 1")));
            }
            let d = &self.doa[3 * i..3 * i + 3];
            let n = (d[0] * d[0] + d[1] * d[1] + d[2] * d[2]).sqrt();
            let ok = if a == 1.0 { (n - 1.0).abs() < 1e-6 } else { n == 0.0 };
            if !ok {
                return Err(SeldError::invalid(format!("DOA norm {n} inconsistent with activity {a}")));
            }
        }
        Ok(())
    }

    /// Frames `start..start+len`, zero beyond the end.
    pub fn crop(&self, start: usize, len: usize) -> LabelSequence {
        let mut out = LabelSequence::empty(len, self.classes);
        let y = self.classes;
        for t in 0..len.min(self.frames.saturating_sub(start)) {
            out.activity[t * y..(t + 1) * y].copy_from_slice(&self.activity[(start + t) * y..(start + t + 1) * y]);
            out.doa[3 * t * y..3 * (t + 1) * y]
                .copy_from_slice(&self.doa[3 * (start + t) * y..3 * (start + t + 1) * y]);
        }
        out
    }

    /// Number of active (frame, class) cells.
    pub fn active_count(&self) -> usize {
        self.activity.iter().filter(|&&a| a > 0.5).count()
    }
}

/// Stacks labels into `[N, T, Y]` activity and `[N, T, Y, 3]` DOA tensors.
pub fn stack_labels(items: &[&LabelSequence]) -> Result<(Tensor, Tensor)> {
    let first = items.first().ok_or_else(|| SeldError::invalid("empty label batch"))?;
    let (t, y) = (first.frames, first.classes);
    if items.iter().any(|l| l.frames != t || l.classes != y) {
        return Err(SeldError::shape("labels in a batch must share frames and classes"));
    }
    let act: Vec<f64> = items.iter().flat_map(|l| l.activity.iter().copied()).collect();
    let doa: Vec<f64> = items.iter().flat_map(|l| l.doa.iter().copied()).collect();
    Ok((Tensor::new(&[items.len(), t, y], act)?, Tensor::new(&[items.len(), t, y, 3], doa)?))
}
