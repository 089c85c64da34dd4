//! Named-tensor record files.
//!
//! Layout: magic `SELDCK1`, then until end of file a sequence of records
//! `u32 name_len | name (utf-8) | u32 rank | u32 dims[rank] | f32 data[prod(dims)]`,
//! all little-endian.

use std::io::{Read, Write};

use crate::error::{Result, SeldError};
use crate::tensor::Tensor;

pub const CHECKPOINT_MAGIC: &[u8; 7] = b"SELDCK1";

#[derive(Clone, Debug, PartialEq)]
pub struct Record {
    pub name: String,
    pub tensor: Tensor,
}

impl Record {
    pub fn new(name: impl Into<String>, tensor: Tensor) -> Self {
        Record { name: name.into(), tensor }
    }
}

pub fn write_records<W: Write>(mut w: W, records: &[Record]) -> Result<()> {
    w.write_all(CHECKPOINT_MAGIC)?;
    for r in records {
        let name = r.name.as_bytes();
        w.write_all(&(name.len() as u32).to_le_bytes())?;
        w.write_all(name)?;
        w.write_all(&(r.tensor.rank() as u32).to_le_bytes())?;
        for &d in r.tensor.shape() {
            w.write_all(&(d as u32).to_le_bytes())?;
        }
        let mut buf = Vec::with_capacity(r.tensor.len() * 4);
        for &v in r.tensor.data() {
            buf.extend_from_slice(&(v as f32).to_le_bytes());
        }
        w.write_all(&buf)?;
    }
    w.flush()?;
    Ok(())
}

pub fn read_records<R: Read>(mut r: R) -> Result<Vec<Record>> {
    let mut bytes = Vec::new();
    r.read_to_end(&mut bytes)?;
    if bytes.len() < CHECKPOINT_MAGIC.len() || &bytes[..7] != CHECKPOINT_MAGIC {
        return Err(SeldError::Format("missing SELDCK1 magic".into()));
    }
    let mut pos = 7;
    let take_u32 = |pos: &mut usize| -> Result<u32> {
        let s = bytes
            .get(*pos..*pos + 4)
            .ok_or_else(|| SeldError::Format("truncated checkpoint".into()))?;
        *pos += 4;
        Ok(u32::from_le_bytes([s[0], s[1], s[2], s[3]]))
    };
    let mut records = Vec::new();
    while pos < bytes.len() {
        let name_len = take_u32(&mut pos)? as usize;
        let name = bytes
            .get(pos..pos + name_len)
            .ok_or_else(|| SeldError::Format("truncated record name".into()))?;
        let name = String::from_utf8(name.to_vec()).map_err(|_| SeldError::Format("record name not utf-8".into()))?;
        pos += name_len;
        let rank = take_u32(&mut pos)? as usize;
        let mut dims = Vec::with_capacity(rank);
        for _ in 0..rank {
            dims.push(take_u32(&mut pos)? as usize);
        }
        let n: usize = dims.iter().product();
        let raw = bytes
            .get(pos..pos + 4 * n)
            .ok_or_else(|| SeldError::Format(format!("truncated data for {name}")))?;
        pos += 4 * n;
        let data = raw
            .chunks_exact(4)
            .map(|c| f32::from_le_bytes([c[0], c[1], c[2], c[3]]) as f64)
            .collect();
        records.push(Record { name, tensor: Tensor::new(&dims, data)? });
    }
    Ok(records)
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    proptest! {
        #[test]
        fn roundtrip_preserves_f32_values(
            dims in proptest::collection::vec(1usize..4, 0..4),
            seed in any::<u64>(),
            name in "[a-z.0-9]{1,12}",
        ) {
            let n: usize = dims.iter().product();
            let t = Tensor::from_fn(&dims, |i| ((seed.wrapping_add(i as u64) % 1000) as f32 / 7.0) as f64);
            prop_assert_eq!(t.len(), n);
            let recs = vec![Record::new(name.clone(), t.clone()), Record::new("b", Tensor::scalar(2.5))];
            let mut buf = Vec::new();
            write_records(&mut buf, &recs).unwrap();
            let back = read_records(&buf[..]).unwrap();
            prop_assert_eq!(back, recs);
        }
    }

    #[test]
    fn bad_magic_rejected() {
        assert!(read_records(&b"NOPE123"[..]).is_err());
        let mut buf = Vec::new();
        write_records(&mut buf, &[Record::new("x", Tensor::ones(&[4]))]).unwrap();
        buf.truncate(buf.len() - 2);
        assert!(read_records(&buf[..]).is_err());
    }
}
