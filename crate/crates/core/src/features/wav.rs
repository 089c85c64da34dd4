//! 4-channel WAV input/output. FOA files use ACN channel order (W, Y, Z, X)
//! on disk and are remapped to (W, X, Y, Z) in memory.

use std::path::Path;

use hound::{SampleFormat, WavReader, WavSpec, WavWriter};

use super::clip::{ClipFormat, MultichannelClip, CHANNELS};
use super::SAMPLE_RATE;
use crate::error::{Result, SeldError};

/// Disk channel `i` holds internal channel `ACN_TO_INTERNAL[i]`.
const ACN_TO_INTERNAL: [usize; 4] = [0, 2, 3, 1];

pub fn read_wav(path: impl AsRef<Path>, format: ClipFormat) -> Result<MultichannelClip> {
    let path = path.as_ref();
    let mut reader = WavReader::open(path)?;
    let spec = reader.spec();
    if spec.channels as usize != CHANNELS {
        return Err(SeldError::invalid(format!("{}: expected 4 channels, found {}", path.display(), spec.channels)));
    }
    if spec.sample_rate != SAMPLE_RATE {
        return Err(SeldError::invalid(format!(
            "{}: sample rate {} Hz not supported (expected {SAMPLE_RATE} Hz)",
            path.display(),
            spec.sample_rate
        )));
    }
    let interleaved: Vec<f64> = match (spec.sample_format, spec.bits_per_sample) {
        (SampleFormat::Float, 32) => reader.samples::<f32>().map(|s| s.map(f64::from)).collect::<std::result::Result<_, _>>()?,
        (SampleFormat::Int, bits @ (16 | 24 | 32)) => {
            let scale = (1u64 << (bits - 1)) as f64;
            reader
                .samples::<i32>()
                .map(|s| s.map(|v| v as f64 / scale))
                .collect::<std::result::Result<_, _>>()?
        }
        (fmt, bits) => {
            return Err(SeldError::invalid(format!("unsupported sample format {fmt:?} {bits}-bit")));
        }
    };
    let mut channels = vec![Vec::with_capacity(interleaved.len() / CHANNELS); CHANNELS];
    for frame in interleaved.chunks_exact(CHANNELS) {
        for (disk, &v) in frame.iter().enumerate() {
            let dst = match format {
                ClipFormat::Foa => ACN_TO_INTERNAL[disk],
                ClipFormat::Mic => disk,
            };
            channels[dst].push(v);
        }
    }
    MultichannelClip::new(channels, spec.sample_rate, format)
}

/// Writes 32-bit float PCM.
pub fn write_wav(path: impl AsRef<Path>, clip: &MultichannelClip) -> Result<()> {
    let spec = WavSpec {
        channels: CHANNELS as u16,
        sample_rate: clip.sample_rate,
        bits_per_sample: 32,
        sample_format: SampleFormat::Float,
    };
    let mut w = WavWriter::create(path, spec)?;
    for n in 0..clip.len() {
        for disk in 0..CHANNELS {
            let src = match clip.format {
                ClipFormat::Foa => ACN_TO_INTERNAL[disk],
                ClipFormat::Mic => disk,
            };
            w.write_sample(clip.samples[src][n] as f32)?;
        }
    }
    w.finalize()?;
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn foa_roundtrip_restores_internal_order() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("a.wav");
        let chans: Vec<Vec<f64>> = (0..4).map(|c| vec![0.125 * (c + 1) as f64; 10]).collect();
        let clip = MultichannelClip::new(chans, SAMPLE_RATE, ClipFormat::Foa).unwrap();
        write_wav(&path, &clip).unwrap();
        assert_eq!(read_wav(&path, ClipFormat::Foa).unwrap(), clip);
        // on disk the second channel is Y
        let raw = read_wav(&path, ClipFormat::Mic).unwrap();
        assert_eq!(raw.samples[1][0], 0.375);
    }

    #[test]
    fn int16_and_bad_rate() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("i16.wav");
        let spec = WavSpec { channels: 4, sample_rate: SAMPLE_RATE, bits_per_sample: 16, sample_format: SampleFormat::Int };
        let mut w = WavWriter::create(&path, spec).unwrap();
        for _ in 0..5 {
            for v in [16384i16, -16384, 0, 32767] {
                w.write_sample(v).unwrap();
            }
        }
        w.finalize().unwrap();
        let clip = read_wav(&path, ClipFormat::Mic).unwrap();
        assert_eq!(clip.samples[0][0], 0.5);
        assert_eq!(clip.samples[1][0], -0.5);

        let path = dir.path().join("48k.wav");
        let spec = WavSpec { sample_rate: 48_000, ..spec };
        let mut w = WavWriter::create(&path, spec).unwrap();
        for _ in 0..4 {
            w.write_sample(0i16).unwrap();
        }
        w.finalize().unwrap();
        assert!(read_wav(&path, ClipFormat::Mic).unwrap_err().to_string().contains("48000"));
    }
}
