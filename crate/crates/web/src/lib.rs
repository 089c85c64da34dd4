use seld_core::features::{featurize, ClipFormat, FeatureConfig, CHANNELS};
use seld_core::metrics::seld_combine;
use seld_core::model::{intermediate_shapes, ModelConfig};
use seld_core::synth::{direction, generate_from_events, EventSpec, SynthConfig};
use wasm_bindgen::prelude::*;

fn js(e: impl ToString) -> JsValue {
    JsValue::from_str(&e.to_string())
}

/// SELD score from ER (0..), F (0..1), LE in degrees and LR (0..1).
pub fn score(er: f64, f: f64, le: f64, lr: f64) -> Result<f64, String> {
    seld_combine(er, f, le, lr).map_err(|e| e.to_string())
}

#[wasm_bindgen]
pub fn seld_score(er: f64, f: f64, le: f64, lr: f64) -> Result<f64, JsValue> {
    score(er, f, le, lr).map_err(js)
}

/// Renders a 1 s FOA clip with one static event and returns
/// `[azimuth, elevation, error]` in degrees from the energy-weighted mean
/// intensity vector.
pub fn estimate(azimuth: f64, elevation: f64, snr_db: f64, seed: u64) -> Result<Vec<f64>, String> {
    let cfg = SynthConfig {
        format: ClipFormat::Foa,
        num_classes: 1,
        clip_seconds: 1.0,
        snr_db: (snr_db, snr_db),
        ..SynthConfig::default()
    };
    let event = EventSpec {
        class_idx: 0,
        onset: 0.0,
        duration: 1.0,
        azimuth: (azimuth, azimuth),
        elevation: (elevation, elevation),
        snr_db,
    };
    let mut rng = seld_core::rng::seeded(seed);
    let clip = generate_from_events("demo".into(), vec![event], &cfg, &mut rng).map_err(|e| e.to_string())?;
    let f = featurize(&clip.clip, &FeatureConfig::default()).map_err(|e| e.to_string())?;
    let mut acc = [0.0; 3];
    for t in 0..f.frames {
        for b in 0..f.bins {
            // weight by the W log-energy, shifted to stay positive
            let w = (f.at(t, b, 0) + 30.0).max(0.0);
            for (k, a) in acc.iter_mut().enumerate() {
                *a += w * f.at(t, b, CHANNELS + k);
            }
        }
    }
    let norm = acc.iter().map(|v| v * v).sum::<f64>().sqrt();
    if norm == 0.0 {
        return Err("no directional energy".into());
    }
    let u = acc.map(|v| v / norm);
    let est_az = u[1].atan2(u[0]).to_degrees();
    let est_el = u[2].asin().to_degrees();
    let truth = direction(azimuth, elevation);
    let cos = (u[0] * truth[0] + u[1] * truth[1] + u[2] * truth[2]).clamp(-1.0, 1.0);
    Ok(vec![est_az, est_el, cos.acos().to_degrees()])
}

#[wasm_bindgen]
pub fn estimate_direction(azimuth: f64, elevation: f64, snr_db: f64, seed: u32) -> Result<Vec<f64>, JsValue> {
    estimate(azimuth, elevation, snr_db, seed as u64).map_err(js)
}

/// One `name: d0 x d1 x ...` line per stage of the network.
pub fn shapes(scale_factor: usize, frames: usize, classes: usize, mic: bool) -> Result<String, String> {
    let cfg = ModelConfig {
        scale_factor,
        input_frames: frames,
        num_classes: classes,
        in_channels: if mic { 10 } else { 7 },
        ..ModelConfig::default()
    };
    let walk = intermediate_shapes(&cfg).map_err(|e| e.to_string())?;
    Ok(walk
        .iter()
        .map(|(name, s)| format!("{name}: {}", s.iter().map(|d| d.to_string()).collect::<Vec<_>>().join(" x ")))
        .collect::<Vec<_>>()
        .join("\n"))
}

#[wasm_bindgen]
pub fn model_shapes(scale_factor: u32, frames: u32, classes: u32, mic: bool) -> Result<String, JsValue> {
    shapes(scale_factor as usize, frames as usize, classes as usize, mic).map_err(js)
}
