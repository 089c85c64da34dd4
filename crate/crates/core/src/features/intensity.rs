use super::mel::MelBank;
use super::stft::Spectrogram;

/// Below this norm a band's intensity vector is reported as zero.
pub const INTENSITY_NORM_GUARD: f64 = 1e-12;

/// Mel-band acoustic intensity vectors from a (W, X, Y, Z) spectrogram,
/// unit-normalized per frame and band. Layout `[frame][band][xyz]`.
pub fn foa_intensity(spec: &Spectrogram, bank: &MelBank) -> Vec<f64> {
    debug_assert_eq!(spec.channels, 4);
    let f = bank.num_bands;
    let mut out = vec![0.0; spec.frames * f * 3];
    for t in 0..spec.frames {
        for m in 0..f {
            let mut v = [0.0; 3];
            for (axis, slot) in v.iter_mut().enumerate() {
                *slot = bank.apply(m, |k| (spec.at(t, k, 0).conj() * spec.at(t, k, axis + 1)).re);
            }
            let norm = (v[0] * v[0] + v[1] * v[1] + v[2] * v[2]).sqrt();
            if norm >= INTENSITY_NORM_GUARD {
                let dst = &mut out[(t * f + m) * 3..(t * f + m + 1) * 3];
                for (d, s) in dst.iter_mut().zip(v) {
                    *d = s / norm;
                }
            }
        }
    }
    out
}
