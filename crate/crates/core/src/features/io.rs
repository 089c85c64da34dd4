//! Feature file: magic `SELDFT1`, `u32 T`, `u32 F`, `u32 C`, `u8 format`, then
//! `T·F·C` little-endian `f32` values in row-major order.

use std::io::{Read, Write};

use super::{ClipFormat, FeatureTensor, SAMPLE_RATE};
use crate::error::{Result, SeldError};

pub const FEATURE_MAGIC: &[u8; 7] = b"SELDFT1";

pub fn write_features<W: Write>(mut w: W, feats: &FeatureTensor) -> Result<()> {
    w.write_all(FEATURE_MAGIC)?;
    for d in feats.shape() {
        w.write_all(&(d as u32).to_le_bytes())?;
    }
    w.write_all(&[feats.format.tag()])?;
    let mut buf = Vec::with_capacity(feats.data.len() * 4);
    for &v in &feats.data {
        buf.extend_from_slice(&(v as f32).to_le_bytes());
    }
    w.write_all(&buf)?;
    w.flush()?;
    Ok(())
}

pub fn read_features<R: Read>(mut r: R) -> Result<FeatureTensor> {
    let mut header = [0u8; 20];
    r.read_exact(&mut header)?;
    if &header[..7] != FEATURE_MAGIC {
        return Err(SeldError::Format("missing SELDFT1 magic".into()));
    }
    let word = |i: usize| u32::from_le_bytes([header[7 + 4 * i], header[8 + 4 * i], header[9 + 4 * i], header[10 + 4 * i]]) as usize;
    let (t, f, c) = (word(0), word(1), word(2));
    let format = ClipFormat::from_tag(header[19])?;
    if c != format.feature_channels() {
        return Err(SeldError::Format(format!("{c} channels inconsistent with format {format}")));
    }
    let mut raw = vec![0u8; t * f * c * 4];
    r.read_exact(&mut raw)?;
    let data = raw.chunks_exact(4).map(|b| f32::from_le_bytes([b[0], b[1], b[2], b[3]]) as f64).collect();
    FeatureTensor::new(t, f, format, data, 480.0 / SAMPLE_RATE as f64)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn header_layout_and_roundtrip() {
        let data: Vec<f64> = (0..2 * 64 * 7).map(|i| (i as f32 * 0.25) as f64).collect();
        let feats = FeatureTensor::new(2, 64, ClipFormat::Foa, data, 0.02).unwrap();
        let mut buf = Vec::new();
        write_features(&mut buf, &feats).unwrap();
        assert_eq!(&buf[..7], b"SELDFT1");
        assert_eq!(&buf[7..11], &2u32.to_le_bytes());
        assert_eq!(&buf[11..15], &64u32.to_le_bytes());
        assert_eq!(&buf[15..19], &7u32.to_le_bytes());
        assert_eq!(buf[19], 0);
        assert_eq!(buf.len(), 20 + 2 * 64 * 7 * 4);
        assert_eq!(read_features(&buf[..]).unwrap(), feats);
    }
}
