use std::f64::consts::PI;

use proptest::prelude::*;
use rand::Rng;
use rand_distr::StandardNormal;
use seld_core::features::{
    featurize, foa_intensity, gcc_phat, log_mel, stft, ClipFormat, FeatureConfig, MelBank, MultichannelClip,
    Spectrogram, StftConfig, GCC_LAGS, MIC_PAIRS,
};
use seld_core::rng::seeded;

const SR: u32 = 24_000;

fn noise(len: usize, seed: u64) -> Vec<f64> {
    let mut rng = seeded(seed);
    (0..len).map(|_| rng.sample::<f64, _>(StandardNormal)).collect()
}

fn bank() -> MelBank {
    MelBank::default_for(1024, SR).unwrap()
}

fn plane_wave_foa(s: &[f64], azimuth_deg: f64, elevation_deg: f64) -> MultichannelClip {
    let (az, el) = (azimuth_deg.to_radians(), elevation_deg.to_radians());
    let gains = [1.0, az.cos() * el.cos(), az.sin() * el.cos(), el.sin()];
    let chans = gains.iter().map(|g| s.iter().map(|v| g * v).collect()).collect();
    MultichannelClip::new(chans, SR, ClipFormat::Foa).unwrap()
}

#[test]
fn foa_plane_wave_intensity_points_at_source() {
    let s = noise(9600, 1);
    for (az, want) in [(0.0, [1.0, 0.0, 0.0]), (90.0, [0.0, 1.0, 0.0])] {
        let clip = plane_wave_foa(&s, az, 0.0);
        let spec = stft(&clip, &StftConfig::default()).unwrap();
        let iv = foa_intensity(&spec, &bank());
        for cell in iv.chunks_exact(3) {
            for k in 0..3 {
                assert!((cell[k] - want[k]).abs() < 1e-6, "az {az}: {cell:?}");
            }
        }
    }
}

#[test]
fn foa_silence_gives_zero_vectors() {
    let clip = MultichannelClip::new(vec![vec![0.0; 4800]; 4], SR, ClipFormat::Foa).unwrap();
    let spec = stft(&clip, &StftConfig::default()).unwrap();
    assert!(foa_intensity(&spec, &bank()).iter().all(|&v| v == 0.0));
}

fn mic_clip(chans: Vec<Vec<f64>>) -> MultichannelClip {
    MultichannelClip::new(chans, SR, ClipFormat::Mic).unwrap()
}

fn argmax(v: &[f64]) -> usize {
    v.iter().enumerate().max_by(|a, b| a.1.total_cmp(b.1)).unwrap().0
}

fn pair_lags(gcc: &[f64], frame: usize, pair: usize) -> Vec<f64> {
    (0..GCC_LAGS).map(|p| gcc[(frame * GCC_LAGS + p) * MIC_PAIRS.len() + pair]).collect()
}

#[test]
fn gcc_identical_channels_peak_at_zero_lag() {
    let s = noise(9600, 2);
    let clip = mic_clip(vec![s.clone(), s.clone(), s.clone(), s]);
    let spec = stft(&clip, &StftConfig::default()).unwrap();
    let gcc = gcc_phat(&spec);
    for t in 0..spec.frames {
        for p in 0..6 {
            assert_eq!(argmax(&pair_lags(&gcc, t, p)), GCC_LAGS / 2);
        }
    }
}

#[test]
fn gcc_delay_matches_time_domain_cross_correlation() {
    let d = 5;
    let s = noise(9600 + d, 3);
    let x1 = s[d..].to_vec();
    let x2 = s[..9600].to_vec(); // x2[n] = x1[n - d]
    let clip = mic_clip(vec![x1.clone(), x2.clone(), x1.clone(), x1.clone()]);
    let cfg = StftConfig::default();
    let spec = stft(&clip, &cfg).unwrap();
    let gcc = gcc_phat(&spec);
    for t in 0..spec.frames - 1 {
        // time-domain oracle on the raw frame
        let start = t * cfg.hop_len;
        let frame = |x: &[f64], n: isize| -> f64 {
            if n < 0 || n as usize >= cfg.window_len {
                0.0
            } else {
                x[start + n as usize]
            }
        };
        let xc: Vec<f64> = (0..GCC_LAGS as isize)
            .map(|p| {
                let lag = p - GCC_LAGS as isize / 2;
                (0..cfg.window_len as isize).map(|n| frame(&x1, n) * frame(&x2, n + lag)).sum()
            })
            .collect();
        let oracle = argmax(&xc) as isize - GCC_LAGS as isize / 2;
        assert_eq!(oracle, d as isize);
        let got = argmax(&pair_lags(&gcc, t, 0)) as isize - GCC_LAGS as isize / 2;
        assert_eq!(got, oracle, "frame {t}");
    }
}

#[test]
fn gcc_independent_noise_has_no_dominant_lag() {
    let len = 480 * 101;
    let clip = mic_clip((0..4).map(|c| noise(len, 10 + c)).collect());
    let spec = stft(&clip, &StftConfig::default()).unwrap();
    let gcc = gcc_phat(&spec);
    let frames = 100;
    for p in 0..6 {
        // per-lag magnitude averaged over frames
        let mut profile = vec![0.0; GCC_LAGS];
        for t in 0..frames {
            for (acc, v) in profile.iter_mut().zip(pair_lags(&gcc, t, p)) {
                *acc += v.abs() / frames as f64;
            }
        }
        let mean = profile.iter().sum::<f64>() / GCC_LAGS as f64;
        let peak = profile.iter().fold(0.0f64, |m, &v| m.max(v));
        assert!(peak < 3.0 * mean, "pair {p}: peak {peak} vs mean {mean}");
    }
}

#[test]
fn gcc_values_bounded() {
    let clip = mic_clip((0..4).map(|c| noise(9600, 20 + c)).collect());
    let gcc = gcc_phat(&stft(&clip, &StftConfig::default()).unwrap());
    assert!(gcc.iter().all(|v| v.abs() <= 1.0 + 1e-6));
}

#[test]
fn featurize_shapes_follow_format() {
    let cfg = FeatureConfig::default();
    for (format, c) in [(ClipFormat::Foa, 7), (ClipFormat::Mic, 10)] {
        let clip = MultichannelClip::new((0..4).map(|k| noise(12 * 24_000, 30 + k)).collect(), SR, format).unwrap();
        let f = featurize(&clip, &cfg).unwrap();
        assert_eq!(f.shape(), [600, 64, c]);
        assert!(f.data.iter().all(|v| v.is_finite()));
        assert_eq!(f.channel_layout.len(), c);
        // bit-identical on repeat
        assert_eq!(featurize(&clip, &cfg).unwrap(), f);
    }
}

#[test]
fn featurize_rejects_other_rates() {
    let clip = MultichannelClip::new(vec![vec![0.0; 48_000]; 4], 48_000, ClipFormat::Foa).unwrap();
    assert!(featurize(&clip, &FeatureConfig::default()).is_err());
}

#[test]
fn sinusoid_spectrum_sanity() {
    // 1 kHz tone lands in the mel band containing 1 kHz
    let tone: Vec<f64> = (0..9600).map(|n| (2.0 * PI * 1000.0 * n as f64 / SR as f64).sin()).collect();
    let clip = mic_clip(vec![tone.clone(), tone.clone(), tone.clone(), tone]);
    let f = featurize(&clip, &FeatureConfig::default()).unwrap();
    let b = bank();
    let band = (0..64).map(|m| f.at(3, m, 0)).enumerate().max_by(|a, b| a.1.total_cmp(&b.1)).unwrap().0;
    let (lo, hi) = b.support[band];
    assert!(lo as f64 * 23.4375 <= 1000.0 && 1000.0 <= hi as f64 * 23.4375);
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(24))]

    #[test]
    fn log_mel_is_monotone(seed in any::<u64>(), boost in 1.0f64..3.0) {
        let mut rng = seeded(seed);
        let mut a = Spectrogram::zeros(2, 513, 4);
        for v in a.data.iter_mut() {
            *v = rustfft::num_complex::Complex64::new(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0));
        }
        let mut b = a.clone();
        for v in b.data.iter_mut() {
            if rng.gen_bool(0.5) {
                *v *= boost;
            }
        }
        let la = log_mel(&a, &bank(), 1e-10).unwrap();
        let lb = log_mel(&b, &bank(), 1e-10).unwrap();
        prop_assert!(la.iter().zip(&lb).all(|(x, y)| y >= x));
    }

    #[test]
    fn intensity_norm_is_zero_or_one(seed in any::<u64>()) {
        let clip = MultichannelClip::new((0..4).map(|c| noise(2400, seed.wrapping_add(c))).collect(), SR, ClipFormat::Foa).unwrap();
        let iv = foa_intensity(&stft(&clip, &StftConfig::default()).unwrap(), &bank());
        for cell in iv.chunks_exact(3) {
            let n = (cell[0] * cell[0] + cell[1] * cell[1] + cell[2] * cell[2]).sqrt();
            prop_assert!(n == 0.0 || (n - 1.0).abs() < 1e-9);
        }
    }
}
