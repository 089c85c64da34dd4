use std::fmt;

use crate::error::{Result, SeldError};

/// Spatial audio format of a 4-channel clip.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum ClipFormat {
    /// First-order ambisonics, stored internally as (W, X, Y, Z).
    Foa,
    /// Tetrahedral microphone array.
    Mic,
}

impl ClipFormat {
    pub fn tag(self) -> u8 {
        match self {
            ClipFormat::Foa => 0,
            ClipFormat::Mic => 1,
        }
    }

    pub fn from_tag(tag: u8) -> Result<Self> {
        match tag {
            0 => Ok(ClipFormat::Foa),
            1 => Ok(ClipFormat::Mic),
            other => Err(SeldError::Format(format!("unknown format tag {other}"))),
        }
    }

    /// Feature channels: 4 log-mel plus 3 intensity (FOA) or 6 GCC-PHAT (MIC).
    pub fn feature_channels(self) -> usize {
        match self {
            ClipFormat::Foa => 7,
            ClipFormat::Mic => 10,
        }
    }
}

impl fmt::Display for ClipFormat {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            ClipFormat::Foa => "foa",
            ClipFormat::Mic => "mic",
        })
    }
}

impl std::str::FromStr for ClipFormat {
    type Err = SeldError;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "foa" => Ok(ClipFormat::Foa),
            "mic" => Ok(ClipFormat::Mic),
            other => Err(SeldError::config(format!("unknown format '{other}' (expected foa|mic)"))),
        }
    }
}

pub const CHANNELS: usize = 4;

#[derive(Clone, Debug, PartialEq)]
pub struct MultichannelClip {
    pub samples: Vec<Vec<f64>>,
    pub sample_rate: u32,
    pub format: ClipFormat,
}

impl MultichannelClip {
    pub fn new(samples: Vec<Vec<f64>>, sample_rate: u32, format: ClipFormat) -> Result<Self> {
        if samples.len() != CHANNELS {
            return Err(SeldError::invalid(format!("expected 4 channels, got {}", samples.len())));
        }
        if samples.iter().any(|c| c.len() != samples[0].len()) {
            return Err(SeldError::invalid("channels differ in length"));
        }
        if sample_rate == 0 {
            return Err(SeldError::invalid("sample rate must be positive"));
        }
        Ok(MultichannelClip { samples, sample_rate, format })
    }

    pub fn channel_count(&self) -> usize {
        self.samples.len()
    }

    /// Samples per channel.
    pub fn len(&self) -> usize {
        self.samples[0].len()
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    pub fn duration(&self) -> f64 {
        self.len() as f64 / self.sample_rate as f64
    }
}
