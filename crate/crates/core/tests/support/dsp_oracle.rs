//! Ground-truth checks of rendered spatial cues against source geometry.

#![allow(dead_code)]

use seld_core::features::{featurize, FeatureConfig, FeatureTensor, GCC_LAGS, MIC_PAIRS, SAMPLE_RATE};
use seld_core::features::ClipFormat;
use seld_core::rng::seeded;
use seld_core::synth::{direction, generate_from_events, mic_delays, EventSpec, SynthConfig};

fn single_event_clip(format: ClipFormat, az: f64, el: f64) -> FeatureTensor {
    let cfg = SynthConfig { format, num_classes: 1, clip_seconds: 2.0, noise_rms: 0.001, ..SynthConfig::default() };
    let ev = EventSpec { class_idx: 0, onset: 0.2, duration: 1.6, azimuth: (az, az), elevation: (el, el), snr_db: 30.0 };
    let clip = generate_from_events("probe".into(), vec![ev], &cfg, &mut seeded(7)).unwrap();
    featurize(&clip.clip, &FeatureConfig::default()).unwrap()
}

/// Feature frames well inside the event (0.2 s .. 1.8 s at 20 ms hop).
fn event_frames() -> std::ops::Range<usize> {
    15..85
}

/// Mean angular error (degrees) between per-(frame, band) intensity vectors
/// and the true direction, over bands within 20 dB of the frame's loudest
/// omni band.
pub fn foa_mean_error(az: f64, el: f64) -> f64 {
    let f = single_event_clip(ClipFormat::Foa, az, el);
    let truth = direction(az, el);
    let (mut sum, mut n) = (0.0, 0usize);
    for t in event_frames() {
        let peak = (0..64).map(|b| f.at(t, b, 0)).fold(f64::MIN, f64::max);
        for b in 0..64 {
            // log-mel is natural-log power: 20 dB = ln(100)
            if f.at(t, b, 0) < peak - 100f64.ln() {
                continue;
            }
            let v = [f.at(t, b, 4), f.at(t, b, 5), f.at(t, b, 6)];
            let dot = (v[0] * truth[0] + v[1] * truth[1] + v[2] * truth[2]).clamp(-1.0, 1.0);
            sum += dot.acos().to_degrees();
            n += 1;
        }
    }
    sum / n as f64
}

/// `(measured, predicted)` GCC-PHAT lag per pair, measured as the argmax of
/// the frame-averaged correlation over the event.
pub fn mic_lags(az: f64, el: f64) -> Vec<(isize, f64)> {
    let f = single_event_clip(ClipFormat::Mic, az, el);
    let tau = mic_delays(direction(az, el));
    MIC_PAIRS
        .iter()
        .enumerate()
        .map(|(p, &(a, b))| {
            let mut avg = vec![0.0; GCC_LAGS];
            for t in event_frames() {
                for (lag, acc) in avg.iter_mut().enumerate() {
                    *acc += f.at(t, lag, 4 + p);
                }
            }
            let best = avg.iter().enumerate().max_by(|x, y| x.1.total_cmp(y.1)).unwrap().0;
            let predicted = (tau[b] - tau[a]) * SAMPLE_RATE as f64;
            (best as isize - GCC_LAGS as isize / 2, predicted)
        })
        .collect()
}

pub fn test_directions() -> Vec<(f64, f64)> {
    vec![
        (0.0, 0.0),
        (90.0, 0.0),
        (180.0, 0.0),
        (-90.0, 0.0),
        (45.0, 30.0),
        (-135.0, -20.0),
        (120.0, 60.0),
        (-30.0, -45.0),
        (10.0, 80.0),
        (-160.0, 15.0),
    ]
}
