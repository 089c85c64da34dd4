//! Frame event CSV: `clip_id,frame_idx,class_idx,x,y,z`.

use std::collections::BTreeMap;
use std::io::{BufRead, Write};

use crate::error::{Result, SeldError};

pub const EVENT_CSV_HEADER: &str = "clip_id,frame_idx,class_idx,x,y,z";

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct FrameEvent {
    pub frame: usize,
    pub class: usize,
    pub doa: [f64; 3],
}

/// Writes the header when `header` is set, then one row per event.
pub fn write_event_csv<W: Write>(mut w: W, clip_id: &str, events: &[FrameEvent], header: bool) -> Result<()> {
    if clip_id.contains(',') {
        return Err(SeldError::invalid(format!("clip id '{clip_id}' contains a comma")));
    }
    if header {
        writeln!(w, "{EVENT_CSV_HEADER}")?;
    }
    for e in events {
        writeln!(w, "{clip_id},{},{},{:.6},{:.6},{:.6}", e.frame, e.class, e.doa[0], e.doa[1], e.doa[2])?;
    }
    Ok(())
}

/// Events grouped by clip id; a header line is optional.
pub fn read_event_csv<R: BufRead>(r: R) -> Result<BTreeMap<String, Vec<FrameEvent>>> {
    let mut out: BTreeMap<String, Vec<FrameEvent>> = BTreeMap::new();
    for (lineno, line) in r.lines().enumerate() {
        let line = line?;
        let line = line.trim();
        if line.is_empty() || line == EVENT_CSV_HEADER {
            continue;
        }
        let bad = || SeldError::Format(format!("event csv line {}: '{line}'", lineno + 1));
        let fields: Vec<&str> = line.split(',').map(str::trim).collect();
        if fields.len() != 6 {
            return Err(bad());
        }
        let num = |s: &str| s.parse::<f64>().map_err(|_| bad());
        let idx = |s: &str| s.parse::<usize>().map_err(|_| bad());
        let e = FrameEvent {
            frame: idx(fields[1])?,
            class: idx(fields[2])?,
            doa: [num(fields[3])?, num(fields[4])?, num(fields[5])?],
        };
        out.entry(fields[0].to_string()).or_default().push(e);
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn roundtrip() {
        let ev = vec![
            FrameEvent { frame: 0, class: 2, doa: [1.0, 0.0, 0.0] },
            FrameEvent { frame: 7, class: 0, doa: [0.0, -0.6, 0.8] },
        ];
        let mut buf = Vec::new();
        write_event_csv(&mut buf, "clip_a", &ev, true).unwrap();
        write_event_csv(&mut buf, "clip_b", &ev[..1], false).unwrap();
        let back = read_event_csv(buf.as_slice()).unwrap();
        assert_eq!(back["clip_a"], ev);
        assert_eq!(back["clip_b"].len(), 1);
        assert!(read_event_csv("a,1,2\n".as_bytes()).is_err());
    }
}
