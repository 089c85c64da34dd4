//! Synthetic spatial clips with frame-level ground truth.
//!
//! Sources are anechoic plane waves. FOA uses first-order encoding with
//! W = s/√2; MIC renders per-channel fractional delays on a tetrahedral
//! array. Labels and rendering sample source direction at the same 100 ms
//! frame centres, so FOA and MIC share a label sequence.

use std::f64::consts::{PI, SQRT_2};
use std::fs;
use std::io::Write;
use std::path::Path;

use rand::seq::SliceRandom;
use rand::Rng;
use rand_distr::StandardNormal;

use crate::error::{Result, SeldError};
use crate::features::wav::write_wav;
use crate::kv::KvMap;
use crate::features::{ClipFormat, MultichannelClip, SAMPLE_RATE};
use crate::labels::LabelSequence;
use crate::metrics::{label_events, write_event_csv};
use crate::rng::{derive, SeldRng};

pub const MAX_CLASSES: usize = 14;
pub const LABEL_HOP: f64 = 0.1;
pub const SPEED_OF_SOUND: f64 = 343.0;
pub const ARRAY_RADIUS: f64 = 0.042;
const SINC_HALF_WIDTH: i64 = 16;
const FADE_SECONDS: f64 = 0.01;

/// Unit vector for azimuth/elevation in degrees.
pub fn direction(azimuth_deg: f64, elevation_deg: f64) -> [f64; 3] {
    let (az, el) = (azimuth_deg.to_radians(), elevation_deg.to_radians());
    [az.cos() * el.cos(), az.sin() * el.cos(), el.sin()]
}

/// Capsule positions in metres: a regular tetrahedron of radius 4.2 cm.
pub fn mic_positions() -> [[f64; 3]; 4] {
    let s = ARRAY_RADIUS / 3f64.sqrt();
    [[s, s, s], [s, -s, -s], [-s, s, -s], [-s, -s, s]]
}

/// Arrival time of a plane wave from `dir` at each capsule relative to the
/// array centre, in seconds (negative = earlier).
pub fn mic_delays(dir: [f64; 3]) -> [f64; 4] {
    let p = mic_positions();
    std::array::from_fn(|m| -(p[m][0] * dir[0] + p[m][1] * dir[1] + p[m][2] * dir[2]) / SPEED_OF_SOUND)
}

#[derive(Clone, Debug, PartialEq)]
pub struct EventSpec {
    pub class_idx: usize,
    pub onset: f64,
    pub duration: f64,
    pub azimuth: (f64, f64),
    pub elevation: (f64, f64),
    pub snr_db: f64,
}

impl EventSpec {
    pub fn is_static(&self) -> bool {
        self.azimuth.0 == self.azimuth.1 && self.elevation.0 == self.elevation.1
    }

    pub fn offset(&self) -> f64 {
        self.onset + self.duration
    }

    /// Direction at time `t` (seconds), linearly interpolated in angle.
    pub fn direction_at(&self, t: f64) -> [f64; 3] {
        let a = ((t - self.onset) / self.duration).clamp(0.0, 1.0);
        direction(
            self.azimuth.0 + a * (self.azimuth.1 - self.azimuth.0),
            self.elevation.0 + a * (self.elevation.1 - self.elevation.0),
        )
    }

    /// Whether label frame `t` (centre at `(t + 0.5)·hop`) falls inside the event.
    pub fn covers_frame(&self, t: usize) -> bool {
        let c = (t as f64 + 0.5) * LABEL_HOP;
        c >= self.onset && c < self.offset()
    }

    fn validate(&self, clip_seconds: f64) -> Result<()> {
        if self.onset < 0.0 || self.duration <= 0.0 || self.offset() > clip_seconds + 1e-9 {
            return Err(SeldError::invalid(format!(
                "event [{}, {}) outside a {clip_seconds} s clip",
                self.onset,
                self.offset()
            )));
        }
        for e in [self.elevation.0, self.elevation.1] {
            if !(-90.0..=90.0).contains(&e) {
                return Err(SeldError::invalid(format!("elevation {e} outside [-90, 90]")));
            }
        }
        Ok(())
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct SynthConfig {
    pub format: ClipFormat,
    pub num_classes: usize,
    pub clip_seconds: f64,
    pub max_overlap: usize,
    pub events_per_second: f64,
    pub min_duration: f64,
    pub max_duration: f64,
    pub snr_db: (f64, f64),
    pub max_elevation: f64,
    pub moving_probability: f64,
    /// RMS of the diffuse noise floor per omni-equivalent channel.
    pub noise_rms: f64,
}

impl Default for SynthConfig {
    fn default() -> Self {
        SynthConfig {
            format: ClipFormat::Foa,
            num_classes: 4,
            clip_seconds: 4.0,
            max_overlap: 2,
            events_per_second: 0.75,
            min_duration: 0.5,
            max_duration: 2.0,
            snr_db: (20.0, 30.0),
            max_elevation: 45.0,
            moving_probability: 0.25,
            noise_rms: 0.003,
        }
    }
}

impl SynthConfig {
    pub fn validate(&self) -> Result<()> {
        if self.num_classes == 0 || self.num_classes > MAX_CLASSES {
            return Err(SeldError::config(format!("num_classes must be in 1..={MAX_CLASSES}")));
        }
        if !(self.clip_seconds > 0.0) || self.max_overlap == 0 {
            return Err(SeldError::config("clip_seconds and max_overlap must be positive"));
        }
        if !(self.min_duration > 0.0 && self.min_duration <= self.max_duration) {
            return Err(SeldError::config("need 0 < min_duration <= max_duration"));
        }
        if self.snr_db.0 > self.snr_db.1 || !(0.0..=90.0).contains(&self.max_elevation) {
            return Err(SeldError::config("bad snr range or max_elevation"));
        }
        Ok(())
    }

    pub fn to_kv(&self) -> KvMap {
        let mut kv = KvMap::new();
        kv.set("format", self.format);
        kv.set("num_classes", self.num_classes);
        kv.set("clip_seconds", self.clip_seconds);
        kv.set("max_overlap", self.max_overlap);
        kv.set("events_per_second", self.events_per_second);
        kv.set("min_duration", self.min_duration);
        kv.set("max_duration", self.max_duration);
        kv.set("snr_db_min", self.snr_db.0);
        kv.set("snr_db_max", self.snr_db.1);
        kv.set("max_elevation", self.max_elevation);
        kv.set("moving_probability", self.moving_probability);
        kv.set("noise_rms", self.noise_rms);
        kv
    }

    pub fn from_kv(kv: &KvMap, base: &SynthConfig) -> Result<Self> {
        let cfg = SynthConfig {
            format: kv.get_or("format", base.format)?,
            num_classes: kv.get_or("num_classes", base.num_classes)?,
            clip_seconds: kv.get_or("clip_seconds", base.clip_seconds)?,
            max_overlap: kv.get_or("max_overlap", base.max_overlap)?,
            events_per_second: kv.get_or("events_per_second", base.events_per_second)?,
            min_duration: kv.get_or("min_duration", base.min_duration)?,
            max_duration: kv.get_or("max_duration", base.max_duration)?,
            snr_db: (kv.get_or("snr_db_min", base.snr_db.0)?, kv.get_or("snr_db_max", base.snr_db.1)?),
            max_elevation: kv.get_or("max_elevation", base.max_elevation)?,
            moving_probability: kv.get_or("moving_probability", base.moving_probability)?,
            noise_rms: kv.get_or("noise_rms", base.noise_rms)?,
        };
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn samples(&self) -> usize {
        (self.clip_seconds * SAMPLE_RATE as f64).round() as usize
    }

    pub fn label_frames(&self) -> usize {
        (self.clip_seconds / LABEL_HOP).round() as usize
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct SynthClip {
    pub id: String,
    pub clip: MultichannelClip,
    pub labels: LabelSequence,
    pub events: Vec<EventSpec>,
}

/// Per-class signal family and parameters. Independent of the seed so that
/// every dataset shares one class inventory.
#[derive(Clone, Copy, Debug, PartialEq)]
pub enum Signature {
    /// Noise through a two-pole resonator.
    NoiseBurst { centre_hz: f64, q: f64 },
    /// Decaying harmonic stack with a 4 Hz tremolo.
    Harmonic { f0_hz: f64, partials: usize },
    /// Linear sweep, repeating every `period` seconds.
    Chirp { from_hz: f64, to_hz: f64, period: f64 },
}

pub fn class_signature(class_idx: usize) -> Signature {
    let k = class_idx as f64;
    match class_idx % 3 {
        0 => Signature::NoiseBurst { centre_hz: 400.0 * 1.6f64.powf(k / 3.0 + 0.5), q: 4.0 },
        1 => Signature::Harmonic { f0_hz: 180.0 * 1.5f64.powf((k - 1.0) / 3.0), partials: 6 },
        _ => Signature::Chirp { from_hz: 600.0 + 300.0 * k, to_hz: 2500.0 + 500.0 * k, period: 0.25 + 0.05 * k },
    }
}

/// Mono source waveform of `len` samples with unit RMS and short fades.
pub fn source_signal(class_idx: usize, len: usize, rng: &mut SeldRng) -> Vec<f64> {
    let sr = SAMPLE_RATE as f64;
    let mut s: Vec<f64> = match class_signature(class_idx) {
        Signature::NoiseBurst { centre_hz, q } => {
            let w = 2.0 * PI * centre_hz / sr;
            let r = 1.0 - w / (2.0 * q);
            let (a1, a2) = (2.0 * r * w.cos(), -r * r);
            let (mut y1, mut y2) = (0.0, 0.0);
            (0..len)
                .map(|_| {
                    let x: f64 = rng.sample(StandardNormal);
                    let y = x + a1 * y1 + a2 * y2;
                    y2 = y1;
                    y1 = y;
                    y
                })
                .collect()
        }
        Signature::Harmonic { f0_hz, partials } => {
            let phase: f64 = rng.gen_range(0.0..2.0 * PI);
            (0..len)
                .map(|n| {
                    let t = n as f64 / sr;
                    let trem = 1.0 + 0.3 * (2.0 * PI * 4.0 * t).sin();
                    trem * (1..=partials)
                        .map(|h| (2.0 * PI * f0_hz * h as f64 * t + phase * h as f64).sin() / h as f64)
                        .sum::<f64>()
                })
                .collect()
        }
        Signature::Chirp { from_hz, to_hz, period } => {
            let k = (to_hz - from_hz) / period;
            (0..len)
                .map(|n| {
                    let t = (n as f64 / sr) % period;
                    (2.0 * PI * (from_hz * t + 0.5 * k * t * t)).sin()
                })
                .collect()
        }
    };
    let rms = (s.iter().map(|v| v * v).sum::<f64>() / len.max(1) as f64).sqrt();
    if rms > 0.0 {
        s.iter_mut().for_each(|v| *v /= rms);
    }
    let fade = ((FADE_SECONDS * sr) as usize).min(len / 2);
    for i in 0..fade {
        let g = 0.5 - 0.5 * (PI * i as f64 / fade as f64).cos();
        s[i] *= g;
        s[len - 1 - i] *= g;
    }
    s
}

/// Active event count at label frame `t`.
fn overlap_at(events: &[EventSpec], t: usize) -> usize {
    events.iter().filter(|e| e.covers_frame(t)).count()
}

/// Random non-conflicting events: at most `max_overlap` at once and never
/// two of the same class.
pub fn place_events(cfg: &SynthConfig, rng: &mut SeldRng) -> Result<Vec<EventSpec>> {
    cfg.validate()?;
    let target = ((cfg.events_per_second * cfg.clip_seconds).round() as usize).max(1);
    let frames = cfg.label_frames();
    let mut events: Vec<EventSpec> = Vec::with_capacity(target);
    for _ in 0..target {
        let mut placed = false;
        for _attempt in 0..200 {
            let max_d = cfg.max_duration.min(cfg.clip_seconds);
            if cfg.min_duration > max_d {
                break;
            }
            // durations and onsets on the label grid keep labels exact
            let duration = snap(rng.gen_range(cfg.min_duration..=max_d)).max(LABEL_HOP);
            let latest = ((cfg.clip_seconds - duration) / LABEL_HOP).floor().max(0.0) as usize;
            let onset = rng.gen_range(0..=latest) as f64 * LABEL_HOP;
            let class_idx = rng.gen_range(0..cfg.num_classes);
            let az0 = rng.gen_range(-180.0..180.0);
            let el0 = rng.gen_range(-cfg.max_elevation..=cfg.max_elevation);
            let (az1, el1) = if rng.gen_bool(cfg.moving_probability.clamp(0.0, 1.0)) {
                let sweep = rng.gen_range(-30.0..30.0) * duration;
                (az0 + sweep, (el0 + rng.gen_range(-10.0..10.0)).clamp(-cfg.max_elevation, cfg.max_elevation))
            } else {
                (az0, el0)
            };
            let ev = EventSpec {
                class_idx,
                onset,
                duration,
                azimuth: (az0, az1),
                elevation: (el0, el1),
                snr_db: rng.gen_range(cfg.snr_db.0..=cfg.snr_db.1),
            };
            let span: Vec<usize> = (0..frames).filter(|&t| ev.covers_frame(t)).collect();
            let clash = span.iter().any(|&t| {
                overlap_at(&events, t) >= cfg.max_overlap
                    || events.iter().any(|o| o.class_idx == ev.class_idx && o.covers_frame(t))
            });
            if !clash && !span.is_empty() {
                events.push(ev);
                placed = true;
                break;
            }
        }
        if !placed {
            return Err(SeldError::invalid(format!(
                "infeasible placement: could not fit event {} of {target}",
                events.len() + 1
            )));
        }
    }
    events.sort_by(|a, b| a.onset.total_cmp(&b.onset).then(a.class_idx.cmp(&b.class_idx)));
    Ok(events)
}

fn snap(seconds: f64) -> f64 {
    (seconds / LABEL_HOP).round() * LABEL_HOP
}

pub fn label_sequence(events: &[EventSpec], frames: usize, num_classes: usize) -> LabelSequence {
    let mut labels = LabelSequence::empty(frames, num_classes);
    for ev in events {
        for t in 0..frames {
            if ev.covers_frame(t) {
                labels.set_active(t, ev.class_idx, ev.direction_at((t as f64 + 0.5) * LABEL_HOP));
            }
        }
    }
    labels
}

fn windowed_sinc(x: f64) -> f64 {
    let w = if x.abs() >= SINC_HALF_WIDTH as f64 { 0.0 } else { 0.5 + 0.5 * (PI * x / SINC_HALF_WIDTH as f64).cos() };
    let s = if x == 0.0 { 1.0 } else { (PI * x).sin() / (PI * x) };
    s * w
}

/// `s` read at fractional position `pos` (zero outside).
fn interpolate(s: &[f64], pos: f64) -> f64 {
    let i0 = pos.floor() as i64;
    let mu = pos - i0 as f64;
    let mut acc = 0.0;
    for j in (1 - SINC_HALF_WIDTH)..=SINC_HALF_WIDTH {
        let k = i0 + j;
        if k >= 0 && (k as usize) < s.len() {
            acc += s[k as usize] * windowed_sinc(j as f64 - mu);
        }
    }
    acc
}

/// Renders `events` over `samples` samples in `format`.
pub fn render(
    events: &[EventSpec],
    format: ClipFormat,
    samples: usize,
    noise_rms: f64,
    rng: &mut SeldRng,
) -> Result<MultichannelClip> {
    let sr = SAMPLE_RATE as f64;
    let mut out = vec![vec![0.0; samples]; 4];
    let hop_samples = (LABEL_HOP * sr).round() as usize;
    for ev in events {
        let start = (ev.onset * sr).round() as usize;
        let end = ((ev.offset() * sr).round() as usize).min(samples);
        if end <= start {
            continue;
        }
        let gain = noise_rms * 10f64.powf(ev.snr_db / 20.0);
        let src: Vec<f64> = source_signal(ev.class_idx, end - start, rng).into_iter().map(|v| v * gain).collect();
        // direction held per label frame, evaluated at the frame centre
        let dir_at = |n: usize| {
            let frame = n / hop_samples;
            ev.direction_at((frame as f64 + 0.5) * LABEL_HOP)
        };
        match format {
            ClipFormat::Foa => {
                for (i, &v) in src.iter().enumerate() {
                    let d = dir_at(start + i);
                    out[0][start + i] += v / SQRT_2;
                    for k in 0..3 {
                        out[k + 1][start + i] += v * d[k];
                    }
                }
            }
            ClipFormat::Mic => {
                let margin = SINC_HALF_WIDTH as usize + 4;
                let lo = start.saturating_sub(margin);
                let hi = (end + margin).min(samples);
                for n in lo..hi {
                    let delays = mic_delays(dir_at(n.clamp(start, end - 1)));
                    for (m, ch) in out.iter_mut().enumerate() {
                        let pos = (n as f64 - start as f64) - delays[m] * sr;
                        ch[n] += interpolate(&src, pos);
                    }
                }
            }
        }
    }
    let gains = match format {
        // diffuse field: dipoles carry a third of the omni power each
        ClipFormat::Foa => [1.0 / SQRT_2, 1.0 / 3f64.sqrt(), 1.0 / 3f64.sqrt(), 1.0 / 3f64.sqrt()],
        ClipFormat::Mic => [1.0; 4],
    };
    for (ch, g) in out.iter_mut().zip(gains) {
        for v in ch.iter_mut() {
            *v += noise_rms * g * rng.sample::<f64, _>(StandardNormal);
        }
    }
    MultichannelClip::new(out, SAMPLE_RATE, format)
}

/// Clip `idx` of a dataset seeded with `seed`.
pub fn generate_clip(seed: u64, idx: u64, cfg: &SynthConfig) -> Result<SynthClip> {
    let mut rng = derive(seed, idx);
    let events = place_events(cfg, &mut rng)?;
    generate_from_events(format!("clip{idx:04}"), events, cfg, &mut rng)
}

pub fn generate_from_events(id: String, events: Vec<EventSpec>, cfg: &SynthConfig, rng: &mut SeldRng) -> Result<SynthClip> {
    cfg.validate()?;
    for ev in &events {
        ev.validate(cfg.clip_seconds)?;
        if ev.class_idx >= cfg.num_classes {
            return Err(SeldError::invalid(format!("class {} >= num_classes", ev.class_idx)));
        }
    }
    let clip = render(&events, cfg.format, cfg.samples(), cfg.noise_rms, rng)?;
    let labels = label_sequence(&events, cfg.label_frames(), cfg.num_classes);
    Ok(SynthClip { id, clip, labels, events })
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Split {
    Train,
    Val,
    Test,
}

impl Split {
    pub fn name(self) -> &'static str {
        match self {
            Split::Train => "train",
            Split::Val => "val",
            Split::Test => "test",
        }
    }
}

impl std::fmt::Display for Split {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(self.name())
    }
}

impl std::str::FromStr for Split {
    type Err = SeldError;
    fn from_str(s: &str) -> Result<Self> {
        match s {
            "train" => Ok(Split::Train),
            "val" => Ok(Split::Val),
            "test" => Ok(Split::Test),
            other => Err(SeldError::Format(format!("unknown split '{other}'"))),
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct Dataset {
    pub seed: u64,
    pub config: SynthConfig,
    pub clips: Vec<(Split, SynthClip)>,
}

impl Dataset {
    pub fn split(&self, split: Split) -> impl Iterator<Item = &SynthClip> {
        self.clips.iter().filter(move |(s, _)| *s == split).map(|(_, c)| c)
    }

    pub fn count(&self, split: Split) -> usize {
        self.split(split).count()
    }
}

/// Split sizes for `n` clips; rounding leftovers go to train.
pub fn split_sizes(n: usize, ratios: [f64; 3]) -> Result<[usize; 3]> {
    if ratios.iter().any(|r| !(0.0..=1.0).contains(r)) || (ratios.iter().sum::<f64>() - 1.0).abs() > 1e-9 {
        return Err(SeldError::config(format!("split ratios {ratios:?} must be in [0, 1] and sum to 1")));
    }
    let val = (n as f64 * ratios[1]).round() as usize;
    let test = ((n as f64 * ratios[2]).round() as usize).min(n - val);
    Ok([n - val - test, val, test])
}

/// Generates `n_clips` clips, shuffles their order with `seed` and assigns
/// train/val/test by `ratios`.
pub fn dataset(seed: u64, n_clips: usize, ratios: [f64; 3], cfg: &SynthConfig) -> Result<Dataset> {
    let sizes = split_sizes(n_clips, ratios)?;
    let mut order: Vec<usize> = (0..n_clips).collect();
    order.shuffle(&mut derive(seed, u64::MAX));
    let mut split_of = vec![Split::Train; n_clips];
    for (rank, &idx) in order.iter().enumerate() {
        split_of[idx] = if rank < sizes[0] {
            Split::Train
        } else if rank < sizes[0] + sizes[1] {
            Split::Val
        } else {
            Split::Test
        };
    }
    let generate = |i: usize| generate_clip(seed, i as u64, cfg).map(|c| (split_of[i], c));
    #[cfg(feature = "parallel")]
    let clips = {
        use rayon::prelude::*;
        (0..n_clips).into_par_iter().map(generate).collect::<Result<Vec<_>>>()?
    };
    #[cfg(not(feature = "parallel"))]
    let clips = (0..n_clips).map(generate).collect::<Result<Vec<_>>>()?;
    Ok(Dataset { seed, config: cfg.clone(), clips })
}

pub const MANIFEST_HEADER: &str = "clip_id,split,format,seed";

/// Writes `<id>.wav`, `<id>.csv` per clip and `manifest.csv` under `dir`.
pub fn write_dataset(ds: &Dataset, dir: &Path) -> Result<()> {
    fs::create_dir_all(dir)?;
    let mut manifest = fs::File::create(dir.join("manifest.csv"))?;
    writeln!(manifest, "{MANIFEST_HEADER}")?;
    for (split, clip) in &ds.clips {
        write_wav(dir.join(format!("{}.wav", clip.id)), &clip.clip)?;
        let f = fs::File::create(dir.join(format!("{}.csv", clip.id)))?;
        write_event_csv(std::io::BufWriter::new(f), &clip.id, &label_events(&clip.labels), true)?;
        writeln!(manifest, "{},{},{},{}", clip.id, split, clip.clip.format, ds.seed)?;
    }
    Ok(())
}

#[derive(Clone, Debug, PartialEq)]
pub struct ManifestEntry {
    pub clip_id: String,
    pub split: Split,
    pub format: ClipFormat,
    pub seed: u64,
}

pub fn read_manifest(path: &Path) -> Result<Vec<ManifestEntry>> {
    let text = fs::read_to_string(path)?;
    let mut out = Vec::new();
    for line in text.lines().map(str::trim) {
        if line.is_empty() || line == MANIFEST_HEADER {
            continue;
        }
        let f: Vec<&str> = line.split(',').collect();
        if f.len() != 4 {
            return Err(SeldError::Format(format!("manifest line '{line}'")));
        }
        out.push(ManifestEntry {
            clip_id: f[0].to_string(),
            split: f[1].parse()?,
            format: f[2].parse()?,
            seed: f[3].parse().map_err(|_| SeldError::Format(format!("manifest seed '{}'", f[3])))?,
        });
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn tetrahedron_is_regular() {
        let p = mic_positions();
        for a in 0..4 {
            let r = (p[a].iter().map(|v| v * v).sum::<f64>()).sqrt();
            assert!((r - ARRAY_RADIUS).abs() < 1e-12);
            for b in a + 1..4 {
                let d: f64 = (0..3).map(|k| (p[a][k] - p[b][k]).powi(2)).sum::<f64>().sqrt();
                assert!((d - ARRAY_RADIUS * (8.0f64 / 3.0).sqrt()).abs() < 1e-12);
            }
        }
    }

    #[test]
    fn split_arithmetic() {
        assert_eq!(split_sizes(8, [0.5, 0.25, 0.25]).unwrap(), [4, 2, 2]);
        assert!(split_sizes(8, [0.5, 0.25, 0.3]).is_err());
    }

    #[test]
    fn fractional_delay_reproduces_shifted_sinusoid() {
        let f = 1000.0 / SAMPLE_RATE as f64;
        let s: Vec<f64> = (0..400).map(|n| (2.0 * PI * f * n as f64).sin()).collect();
        for n in 100..300 {
            let want = (2.0 * PI * f * (n as f64 - 0.37)).sin();
            assert!((interpolate(&s, n as f64 - 0.37) - want).abs() < 2e-3);
        }
    }
}
