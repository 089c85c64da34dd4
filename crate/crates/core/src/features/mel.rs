//! HTK-scale triangular mel filterbank and log-mel energies.

use super::stft::Spectrogram;
use crate::error::{Result, SeldError};

pub fn hz_to_mel(hz: f64) -> f64 {
    2595.0 * (1.0 + hz / 700.0).log10()
}

pub fn mel_to_hz(mel: f64) -> f64 {
    700.0 * (10f64.powf(mel / 2595.0) - 1.0)
}

#[derive(Clone, Debug, PartialEq)]
pub struct MelBank {
    pub num_bands: usize,
    pub num_bins: usize,
    pub f_min: f64,
    pub f_max: f64,
    /// `num_bands × num_bins`, row-major.
    pub weights: Vec<f64>,
    /// First and one-past-last nonzero bin of each filter.
    pub support: Vec<(usize, usize)>,
    pub centers_hz: Vec<f64>,
}

impl MelBank {
    pub fn htk(num_bands: usize, fft_len: usize, sample_rate: u32, f_min: f64, f_max: f64) -> Result<Self> {
        let nyquist = sample_rate as f64 / 2.0;
        if !(0.0..f_max).contains(&f_min) || f_max > nyquist || num_bands == 0 {
            return Err(SeldError::config(format!("bad mel range {f_min}..{f_max} Hz for {num_bands} bands")));
        }
        let num_bins = fft_len / 2 + 1;
        let (lo, hi) = (hz_to_mel(f_min), hz_to_mel(f_max));
        let edges: Vec<f64> = (0..num_bands + 2)
            .map(|i| mel_to_hz(lo + (hi - lo) * i as f64 / (num_bands + 1) as f64))
            .collect();
        let bin_hz = |k: usize| k as f64 * sample_rate as f64 / fft_len as f64;
        let mut weights = vec![0.0; num_bands * num_bins];
        let mut support = Vec::with_capacity(num_bands);
        for m in 0..num_bands {
            let (left, center, right) = (edges[m], edges[m + 1], edges[m + 2]);
            let mut first = None;
            let mut last = 0;
            for k in 0..num_bins {
                let f = bin_hz(k);
                let w = if f > left && f <= center {
                    (f - left) / (center - left)
                } else if f > center && f < right {
                    (right - f) / (right - center)
                } else {
                    0.0
                };
                if w > 0.0 {
                    weights[m * num_bins + k] = w;
                    first.get_or_insert(k);
                    last = k + 1;
                }
            }
            let first = first.ok_or_else(|| {
                SeldError::config(format!("mel band {m} ({center:.1} Hz) covers no FFT bin"))
            })?;
            support.push((first, last));
        }
        Ok(MelBank {
            num_bands,
            num_bins,
            f_min,
            f_max,
            weights,
            support,
            centers_hz: edges[1..=num_bands].to_vec(),
        })
    }

    /// 64 bands from 50 Hz to Nyquist.
    pub fn default_for(fft_len: usize, sample_rate: u32) -> Result<Self> {
        Self::htk(64, fft_len, sample_rate, 50.0, sample_rate as f64 / 2.0)
    }

    pub fn band(&self, m: usize) -> &[f64] {
        &self.weights[m * self.num_bins..(m + 1) * self.num_bins]
    }

    /// `Σ_bins weight · value` for band `m` over a bin-indexed accessor.
    #[inline]
    pub fn apply(&self, m: usize, mut value: impl FnMut(usize) -> f64) -> f64 {
        let (a, b) = self.support[m];
        let w = self.band(m);
        (a..b).map(|k| w[k] * value(k)).sum()
    }
}

/// `ln(max(floor, Σ_bins bank·|S|²))`, laid out `[frame][band][channel]`.
pub fn log_mel(spec: &Spectrogram, bank: &MelBank, floor: f64) -> Result<Vec<f64>> {
    if bank.num_bins != spec.bins {
        return Err(SeldError::shape(format!(
            "mel bank has {} bins, spectrum has {}",
            bank.num_bins, spec.bins
        )));
    }
    if floor <= 0.0 {
        return Err(SeldError::config("log floor must be positive"));
    }
    let (f, c) = (bank.num_bands, spec.channels);
    let mut out = vec![0.0; spec.frames * f * c];
    for t in 0..spec.frames {
        for m in 0..f {
            for ch in 0..c {
                let e = bank.apply(m, |k| spec.at(t, k, ch).norm_sqr());
                out[(t * f + m) * c + ch] = e.max(floor).ln();
            }
        }
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use rustfft::num_complex::Complex64;

    fn bank() -> MelBank {
        MelBank::default_for(1024, 24_000).unwrap()
    }

    #[test]
    fn filters_are_contiguous_nonnegative_and_increasing() {
        let b = bank();
        assert_eq!(b.num_bands, 64);
        for m in 0..64 {
            let (a, e) = b.support[m];
            assert!(a < e);
            assert!(b.band(m).iter().all(|&w| w >= 0.0));
            assert!(b.band(m)[a..e].iter().all(|&w| w > 0.0), "band {m} has a hole");
        }
        assert!(b.centers_hz.windows(2).all(|w| w[0] < w[1]));
    }

    #[test]
    fn silence_hits_the_floor() {
        let spec = Spectrogram::zeros(3, 513, 4);
        let out = log_mel(&spec, &bank(), 1e-10).unwrap();
        assert!(out.iter().all(|&v| v == (1e-10f64).ln()));
    }

    #[test]
    fn doubling_magnitude_adds_ln4() {
        let mut spec = Spectrogram::zeros(2, 513, 4);
        for (i, v) in spec.data.iter_mut().enumerate() {
            *v = Complex64::new(1.0 + (i % 7) as f64, (i % 3) as f64);
        }
        let a = log_mel(&spec, &bank(), 1e-10).unwrap();
        for v in spec.data.iter_mut() {
            *v *= 2.0;
        }
        let b = log_mel(&spec, &bank(), 1e-10).unwrap();
        for (x, y) in a.iter().zip(&b) {
            assert!((y - x - 4f64.ln()).abs() < 1e-12);
        }
    }

    #[test]
    fn flat_power_gives_filter_areas() {
        let b = bank();
        let mut spec = Spectrogram::zeros(1, 513, 1);
        for v in spec.data.iter_mut() {
            *v = Complex64::new(1.0, 0.0);
        }
        let out = log_mel(&spec, &b, 1e-10).unwrap();
        for m in 0..64 {
            let area: f64 = b.band(m).iter().sum();
            assert!((out[m] - area.ln()).abs() < 1e-12);
        }
    }

    #[test]
    fn dimension_mismatch_errors() {
        let spec = Spectrogram::zeros(1, 257, 4);
        assert!(log_mel(&spec, &bank(), 1e-10).is_err());
    }
}
