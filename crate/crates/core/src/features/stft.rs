use std::f64::consts::PI;
use std::sync::Arc;

use rustfft::num_complex::Complex64;
use rustfft::{Fft, FftPlanner};

use super::clip::MultichannelClip;
use crate::error::{Result, SeldError};

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Window {
    Hann,
}

/// Framing parameters, all in samples.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct StftConfig {
    pub window_len: usize,
    pub hop_len: usize,
    pub fft_len: usize,
    pub window: Window,
}

impl Default for StftConfig {
    /// 40 ms window, 20 ms hop at 24 kHz.
    fn default() -> Self {
        StftConfig { window_len: 960, hop_len: 480, fft_len: 1024, window: Window::Hann }
    }
}

impl StftConfig {
    pub fn validate(&self) -> Result<()> {
        if self.hop_len == 0 || self.hop_len >= self.window_len {
            return Err(SeldError::config("stft hop must be in (0, window_len)"));
        }
        if self.fft_len < self.window_len {
            return Err(SeldError::config("stft fft_len must be >= window_len"));
        }
        Ok(())
    }

    pub fn bins(&self) -> usize {
        self.fft_len / 2 + 1
    }

    /// Frames produced for `len` samples: the tail is padded with
    /// `window_len − hop_len` zeros before framing, so exact multiples of the
    /// hop give `len / hop_len` frames.
    pub fn frame_count(&self, len: usize) -> usize {
        let padded = len + self.window_len - self.hop_len;
        (padded - self.window_len) / self.hop_len + 1
    }

    pub fn window_coefficients(&self) -> Vec<f64> {
        match self.window {
            // periodic Hann
            Window::Hann => (0..self.window_len)
                .map(|n| 0.5 - 0.5 * (2.0 * PI * n as f64 / self.window_len as f64).cos())
                .collect(),
        }
    }
}

/// One-sided complex spectrogram, indexed `[frame][bin][channel]`.
#[derive(Clone, Debug, PartialEq)]
pub struct Spectrogram {
    pub frames: usize,
    pub bins: usize,
    pub channels: usize,
    pub data: Vec<Complex64>,
}

impl Spectrogram {
    pub fn zeros(frames: usize, bins: usize, channels: usize) -> Self {
        Spectrogram { frames, bins, channels, data: vec![Complex64::new(0.0, 0.0); frames * bins * channels] }
    }

    #[inline]
    pub fn at(&self, frame: usize, bin: usize, channel: usize) -> Complex64 {
        self.data[(frame * self.bins + bin) * self.channels + channel]
    }

    #[inline]
    pub fn at_mut(&mut self, frame: usize, bin: usize, channel: usize) -> &mut Complex64 {
        &mut self.data[(frame * self.bins + bin) * self.channels + channel]
    }
}

pub(crate) fn forward_plan(n: usize) -> Arc<dyn Fft<f64>> {
    FftPlanner::new().plan_fft_forward(n)
}

pub fn stft(clip: &MultichannelClip, cfg: &StftConfig) -> Result<Spectrogram> {
    cfg.validate()?;
    let len = clip.len();
    if len < cfg.window_len {
        return Err(SeldError::ClipTooShort { len, window: cfg.window_len });
    }
    let frames = cfg.frame_count(len);
    let bins = cfg.bins();
    let channels = clip.channel_count();
    let window = cfg.window_coefficients();
    let fft = forward_plan(cfg.fft_len);
    let mut buf = vec![Complex64::new(0.0, 0.0); cfg.fft_len];
    let mut scratch = vec![Complex64::new(0.0, 0.0); fft.get_inplace_scratch_len()];
    let mut spec = Spectrogram::zeros(frames, bins, channels);
    for (c, samples) in clip.samples.iter().enumerate() {
        for t in 0..frames {
            let start = t * cfg.hop_len;
            for (n, slot) in buf.iter_mut().enumerate() {
                let v = if n < cfg.window_len {
                    samples.get(start + n).copied().unwrap_or(0.0) * window[n]
                } else {
                    0.0
                };
                *slot = Complex64::new(v, 0.0);
            }
            fft.process_with_scratch(&mut buf, &mut scratch);
            for k in 0..bins {
                *spec.at_mut(t, k, c) = buf[k];
            }
        }
    }
    Ok(spec)
}
