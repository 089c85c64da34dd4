//! Multichannel front end: STFT, log-mel energies, FOA intensity vectors and
//! GCC-PHAT, stacked into `T × 64 × C` feature images.

mod clip;
mod gcc;
mod intensity;
pub mod io;
mod mel;
mod stft;
pub mod wav;

pub use clip::{ClipFormat, MultichannelClip, CHANNELS};
pub use gcc::{gcc_phat, GCC_LAGS, MIC_PAIRS};
pub use intensity::{foa_intensity, INTENSITY_NORM_GUARD};
pub use mel::{hz_to_mel, log_mel, mel_to_hz, MelBank};
pub use stft::{stft, Spectrogram, StftConfig, Window};

use std::fmt;

use crate::error::{Result, SeldError};

pub const SAMPLE_RATE: u32 = 24_000;
pub const MEL_BANDS: usize = 64;
pub const LOG_FLOOR: f64 = 1e-10;

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum ChannelRole {
    LogMel(usize),
    Intensity(usize),
    GccPhat(usize, usize),
}

impl fmt::Display for ChannelRole {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match *self {
            ChannelRole::LogMel(c) => write!(f, "logmel{c}"),
            ChannelRole::Intensity(axis) => write!(f, "intensity_{}", ["x", "y", "z"][axis]),
            ChannelRole::GccPhat(a, b) => write!(f, "gcc{a}{b}"),
        }
    }
}

pub fn channel_layout(format: ClipFormat) -> Vec<ChannelRole> {
    let mut roles: Vec<ChannelRole> = (0..CHANNELS).map(ChannelRole::LogMel).collect();
    match format {
        ClipFormat::Foa => roles.extend((0..3).map(ChannelRole::Intensity)),
        ClipFormat::Mic => roles.extend(MIC_PAIRS.iter().map(|&(a, b)| ChannelRole::GccPhat(a, b))),
    }
    roles
}

/// `frames × bins × channels` feature image, row-major.
#[derive(Clone, Debug, PartialEq)]
pub struct FeatureTensor {
    pub frames: usize,
    pub bins: usize,
    pub channels: usize,
    pub data: Vec<f64>,
    pub frame_hop: f64,
    pub format: ClipFormat,
    pub channel_layout: Vec<ChannelRole>,
}

impl FeatureTensor {
    pub fn new(frames: usize, bins: usize, format: ClipFormat, data: Vec<f64>, frame_hop: f64) -> Result<Self> {
        let channels = format.feature_channels();
        if data.len() != frames * bins * channels {
            return Err(SeldError::shape(format!(
                "feature data has {} values, expected {frames}x{bins}x{channels}",
                data.len()
            )));
        }
        Ok(FeatureTensor { frames, bins, channels, data, frame_hop, format, channel_layout: channel_layout(format) })
    }

    pub fn shape(&self) -> [usize; 3] {
        [self.frames, self.bins, self.channels]
    }

    #[inline]
    pub fn at(&self, t: usize, f: usize, c: usize) -> f64 {
        self.data[(t * self.bins + f) * self.channels + c]
    }

    /// Frames `start..start+len` (zero-padded past the end).
    pub fn crop(&self, start: usize, len: usize) -> FeatureTensor {
        let row = self.bins * self.channels;
        let mut data = vec![0.0; len * row];
        let avail = self.frames.saturating_sub(start).min(len);
        data[..avail * row].copy_from_slice(&self.data[start * row..(start + avail) * row]);
        FeatureTensor { frames: len, data, ..self.clone_header() }
    }

    fn clone_header(&self) -> FeatureTensor {
        FeatureTensor {
            frames: 0,
            bins: self.bins,
            channels: self.channels,
            data: Vec::new(),
            frame_hop: self.frame_hop,
            format: self.format,
            channel_layout: self.channel_layout.clone(),
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct FeatureConfig {
    pub sample_rate: u32,
    pub stft: StftConfig,
    pub mel_bands: usize,
    pub f_min: f64,
    pub log_floor: f64,
}

impl Default for FeatureConfig {
    fn default() -> Self {
        FeatureConfig {
            sample_rate: SAMPLE_RATE,
            stft: StftConfig::default(),
            mel_bands: MEL_BANDS,
            f_min: 50.0,
            log_floor: LOG_FLOOR,
        }
    }
}

/// Precomputed filterbank for repeated featurization.
#[derive(Clone, Debug)]
pub struct FeatureExtractor {
    cfg: FeatureConfig,
    bank: MelBank,
}

impl FeatureExtractor {
    pub fn new(cfg: FeatureConfig) -> Result<Self> {
        cfg.stft.validate()?;
        if cfg.mel_bands != MEL_BANDS {
            return Err(SeldError::config(format!("feature images need {MEL_BANDS} mel bands")));
        }
        let bank = MelBank::htk(cfg.mel_bands, cfg.stft.fft_len, cfg.sample_rate, cfg.f_min, cfg.sample_rate as f64 / 2.0)?;
        Ok(FeatureExtractor { cfg, bank })
    }

    pub fn config(&self) -> &FeatureConfig {
        &self.cfg
    }

    pub fn mel_bank(&self) -> &MelBank {
        &self.bank
    }

    pub fn frame_hop(&self) -> f64 {
        self.cfg.stft.hop_len as f64 / self.cfg.sample_rate as f64
    }

    pub fn extract(&self, clip: &MultichannelClip) -> Result<FeatureTensor> {
        if clip.sample_rate != self.cfg.sample_rate {
            return Err(SeldError::invalid(format!(
                "sample rate {} Hz not supported (expected {} Hz, no resampling)",
                clip.sample_rate, self.cfg.sample_rate
            )));
        }
        let spec = stft(clip, &self.cfg.stft)?;
        let mel = log_mel(&spec, &self.bank, self.cfg.log_floor)?;
        let (extra, extra_c) = match clip.format {
            ClipFormat::Foa => (foa_intensity(&spec, &self.bank), 3),
            ClipFormat::Mic => (gcc_phat(&spec), MIC_PAIRS.len()),
        };
        let frames = spec.frames;
        let c = CHANNELS + extra_c;
        let mut data = Vec::with_capacity(frames * MEL_BANDS * c);
        for t in 0..frames {
            for f in 0..MEL_BANDS {
                let cell = t * MEL_BANDS + f;
                data.extend_from_slice(&mel[cell * CHANNELS..(cell + 1) * CHANNELS]);
                data.extend_from_slice(&extra[cell * extra_c..(cell + 1) * extra_c]);
            }
        }
        debug_assert!(data.iter().all(|v| v.is_finite()));
        FeatureTensor::new(frames, MEL_BANDS, clip.format, data, self.frame_hop())
    }
}

pub fn featurize(clip: &MultichannelClip, cfg: &FeatureConfig) -> Result<FeatureTensor> {
    FeatureExtractor::new(cfg.clone())?.extract(clip)
}
