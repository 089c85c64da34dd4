use rustfft::num_complex::Complex64;
use rustfft::FftPlanner;

use super::stft::Spectrogram;

/// Channel pairs in fixed lexicographic order.
pub const MIC_PAIRS: [(usize, usize); 6] = [(0, 1), (0, 2), (0, 3), (1, 2), (1, 3), (2, 3)];

/// Lag window kept from the full correlation; position `p` holds lag `p − LAGS/2`.
pub const GCC_LAGS: usize = 64;

const PHAT_GUARD: f64 = 1e-20;

/// Lag-domain GCC-PHAT per frame and channel pair, center-cropped to
/// [`GCC_LAGS`] lags. Layout `[frame][lag][pair]`.
///
/// The value at lag `ℓ` is the phase-transformed correlation
/// `Σ_n x_a[n]·x_b[n+ℓ]`, so a positive lag means the second channel of the
/// pair lags the first.
pub fn gcc_phat(spec: &Spectrogram) -> Vec<f64> {
    debug_assert_eq!(spec.channels, 4);
    let n = 2 * (spec.bins - 1);
    let ifft = FftPlanner::<f64>::new().plan_fft_inverse(n);
    let mut scratch = vec![Complex64::new(0.0, 0.0); ifft.get_inplace_scratch_len()];
    let mut buf = vec![Complex64::new(0.0, 0.0); n];
    let half = GCC_LAGS as isize / 2;
    let np = MIC_PAIRS.len();
    let mut out = vec![0.0; spec.frames * GCC_LAGS * np];
    for t in 0..spec.frames {
        for (p, &(a, b)) in MIC_PAIRS.iter().enumerate() {
            for k in 0..spec.bins {
                // conj(X_a)·X_b peaks at +d when x_b is x_a delayed by d
                let cross = spec.at(t, k, a).conj() * spec.at(t, k, b);
                let mag = cross.norm();
                buf[k] = if mag > PHAT_GUARD { cross / mag } else { Complex64::new(0.0, 0.0) };
            }
            for k in 1..spec.bins - 1 {
                buf[n - k] = buf[k].conj();
            }
            ifft.process_with_scratch(&mut buf, &mut scratch);
            for pos in 0..GCC_LAGS {
                let lag = pos as isize - half;
                let idx = lag.rem_euclid(n as isize) as usize;
                out[(t * GCC_LAGS + pos) * np + p] = buf[idx].re / n as f64;
            }
        }
    }
    out
}
