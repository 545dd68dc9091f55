//! Hann-tapered zero-padded periodogram shared by HR estimation, SNR scoring,
//! and spectral component selection.

use rustfft::{num_complex::Complex64, FftPlanner};

/// One-sided power spectrum on the grid `k * fs / nfft`.
#[derive(Debug, Clone)]
pub struct Spectrum {
    pub freqs: Vec<f64>,
    pub power: Vec<f64>,
    /// Grid spacing in Hz.
    pub bin_hz: f64,
}

/// Symmetric Hann window.
pub fn hann(n: usize) -> Vec<f64> {
    if n <= 1 {
        return vec![1.0; n];
    }
    let denom = (n - 1) as f64;
    (0..n)
        .map(|i| 0.5 * (1.0 - (2.0 * std::f64::consts::PI * i as f64 / denom).cos()))
        .collect()
}

/// FFT length giving a grid no coarser than 0.5 BPM: at least `120 * fs`
/// points, rounded up to the next power of two (and never shorter than the
/// signal itself).
pub fn default_nfft(fs: f64, n: usize) -> usize {
    let min = (120.0 * fs).ceil() as usize;
    min.max(n).max(2).next_power_of_two()
}

/// Hann-tapered, zero-padded periodogram. Power is |X_k|^2, unnormalized;
/// callers compare bins or take ratios, so the absolute scale cancels.
pub fn periodogram_hann(x: &[f64], fs: f64, nfft: usize) -> Spectrum {
    let n = x.len().min(nfft);
    let w = hann(n);
    let mut buf: Vec<Complex64> = vec![Complex64::new(0.0, 0.0); nfft];
    for i in 0..n {
        buf[i] = Complex64::new(x[i] * w[i], 0.0);
    }
    FftPlanner::new().plan_fft_forward(nfft).process(&mut buf);

    let half = nfft / 2;
    let bin_hz = fs / nfft as f64;
    let freqs = (0..=half).map(|k| k as f64 * bin_hz).collect();
    let power = buf[..=half].iter().map(|c| c.norm_sqr()).collect();
    Spectrum {
        freqs,
        power,
        bin_hz,
    }
}

impl Spectrum {
    /// Indices of bins with `lo <= f <= hi`.
    pub fn band_indices(&self, lo_hz: f64, hi_hz: f64) -> std::ops::Range<usize> {
        let start = self.freqs.partition_point(|&f| f < lo_hz);
        let end = self.freqs.partition_point(|&f| f <= hi_hz);
        start..end
    }

    /// Strongest bin inside the band; ties resolve to the lowest frequency.
    pub fn band_peak(&self, lo_hz: f64, hi_hz: f64) -> Option<(f64, f64)> {
        let range = self.band_indices(lo_hz, hi_hz);
        let mut best: Option<(f64, f64)> = None;
        for k in range {
            match best {
                Some((_, p)) if self.power[k] <= p => {}
                _ => best = Some((self.freqs[k], self.power[k])),
            }
        }
        best
    }

    pub fn band_power(&self, lo_hz: f64, hi_hz: f64) -> f64 {
        self.band_indices(lo_hz, hi_hz).map(|k| self.power[k]).sum()
    }
}
