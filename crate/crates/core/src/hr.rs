//! Spectral heart-rate estimation: the strongest in-band periodogram peak,
//! whole-video and over sliding windows.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::rppg::PulseSignal;
use crate::spectrum::{default_nfft, periodogram_hann};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct HrEstimate {
    pub bpm: f64,
    pub peak_power: f64,
    /// Search band in Hz, after Nyquist clipping.
    pub band: (f64, f64),
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct HrSeries {
    /// Window-center timestamps, strictly increasing.
    pub times: Vec<f64>,
    pub bpm: Vec<f64>,
    pub window_s: f64,
    pub stride_s: f64,
}

/// Peak-frequency HR from raw samples. The periodogram is Hann-tapered and
/// zero-padded to a grid no coarser than 0.5 BPM; ties break toward the
/// lower frequency.
pub fn estimate_hr_samples(x: &[f64], fs: f64, band: (f64, f64)) -> Result<HrEstimate> {
    if (x.len() as f64) < 2.0 * fs {
        return Err(Error::SignalTooShort(format!(
            "{} samples at {fs} Hz is under the 2 s minimum",
            x.len()
        )));
    }
    let (lo, hi_requested) = band;
    let nyquist = fs / 2.0;
    let hi = hi_requested.min(nyquist);
    if lo <= 0.0 || lo.is_nan() || lo >= hi {
        return Err(Error::EmptyBand {
            lo,
            hi: hi_requested,
            nyquist,
        });
    }
    let spec = periodogram_hann(x, fs, default_nfft(fs, x.len()));
    let (freq, peak_power) = spec.band_peak(lo, hi).ok_or(Error::EmptyBand {
        lo,
        hi: hi_requested,
        nyquist,
    })?;
    Ok(HrEstimate {
        bpm: 60.0 * freq,
        peak_power,
        band: (lo, hi),
    })
}

/// Whole-signal HR of an extracted pulse.
pub fn estimate_hr_fft(pulse: &PulseSignal, band: (f64, f64)) -> Result<HrEstimate> {
    estimate_hr_samples(&pulse.samples, pulse.fps, band)
}

/// HR over time: one estimate per sliding window, stamped at the window
/// center.
pub fn hr_over_time(
    pulse: &PulseSignal,
    window_s: f64,
    stride_s: f64,
    band: (f64, f64),
) -> Result<HrSeries> {
    let n = pulse.samples.len();
    let win = (window_s * pulse.fps).round() as usize;
    let stride = (stride_s * pulse.fps).round().max(1.0) as usize;
    if win > n {
        return Err(Error::WindowTooLong {
            window: win,
            len: n,
        });
    }
    if win == 0 {
        return Err(Error::Validation(
            "window must span at least one sample".into(),
        ));
    }

    let mut times = Vec::new();
    let mut bpm = Vec::new();
    let mut start = 0;
    while start + win <= n {
        let est = estimate_hr_samples(&pulse.samples[start..start + win], pulse.fps, band)?;
        times.push((start as f64 + win as f64 / 2.0) / pulse.fps);
        bpm.push(est.bpm);
        start += stride;
    }
    Ok(HrSeries {
        times,
        bpm,
        window_s,
        stride_s,
    })
}

/// Write an HR series as CSV with header `t,bpm`.
pub fn save_hr_series_csv(series: &HrSeries, path: &std::path::Path) -> Result<()> {
    let mut out = String::from("t,bpm\n");
    for (t, b) in series.times.iter().zip(series.bpm.iter()) {
        out.push_str(&format!("{t:.6},{b:.4}\n"));
    }
    std::fs::write(path, out).map_err(|e| Error::io(path, e))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rppg::Method;
    use crate::synth::{HrProfile, Lcg64};

    const TPI: f64 = 2.0 * std::f64::consts::PI;

    fn tone(f: f64, fs: f64, secs: f64, amp: f64) -> Vec<f64> {
        let n = (fs * secs) as usize;
        (0..n)
            .map(|i| amp * (TPI * f * i as f64 / fs).sin())
            .collect()
    }

    fn pulse(samples: Vec<f64>, fps: f64) -> PulseSignal {
        PulseSignal {
            samples,
            fps,
            method: Method::Green,
        }
    }

    const BAND: (f64, f64) = (0.65, 3.3);

    #[test]
    fn single_tone_estimates_72bpm() {
        let est = estimate_hr_samples(&tone(1.2, 30.0, 10.0, 1.0), 30.0, BAND).unwrap();
        assert!((est.bpm - 72.0).abs() <= 0.5, "bpm {}", est.bpm);
        assert!(est.peak_power > 0.0);
    }

    #[test]
    fn amplitude_modulated_tone_keeps_its_rate() {
        // time-varying amplitude, constant 95 BPM carrier
        let fs = 30.0;
        let n = (fs * 30.0) as usize;
        let f = 95.0 / 60.0;
        let x: Vec<f64> = (0..n)
            .map(|i| {
                let t = i as f64 / fs;
                (1.0 + 0.5 * (TPI * 0.05 * t).sin()) * (TPI * f * t).sin()
            })
            .collect();
        let est = estimate_hr_samples(&x, fs, BAND).unwrap();
        assert!((est.bpm - 95.0).abs() <= 0.5, "bpm {}", est.bpm);
    }

    #[test]
    fn strongest_peak_wins() {
        let a = tone(1.0, 30.0, 20.0, 1.0);
        let b = tone(2.0, 30.0, 20.0, 0.5);
        let sum: Vec<f64> = a.iter().zip(&b).map(|(x, y)| x + y).collect();
        let est = estimate_hr_samples(&sum, 30.0, BAND).unwrap();
        assert!((est.bpm - 60.0).abs() <= 0.5, "bpm {}", est.bpm);
    }

    #[test]
    fn too_short_signal_rejected() {
        assert!(matches!(
            estimate_hr_samples(&tone(1.2, 30.0, 1.5, 1.0), 30.0, BAND),
            Err(Error::SignalTooShort(_))
        ));
    }

    #[test]
    fn band_clipping_and_empty_band() {
        // hi beyond Nyquist clips silently as long as the band stays nonempty
        let est = estimate_hr_samples(&tone(1.2, 30.0, 10.0, 1.0), 30.0, (0.65, 20.0)).unwrap();
        assert!((est.bpm - 72.0).abs() <= 0.5);
        assert!(est.band.1 <= 15.0);
        // band entirely above Nyquist is empty
        assert!(matches!(
            estimate_hr_samples(&tone(1.2, 30.0, 10.0, 1.0), 30.0, (16.0, 20.0)),
            Err(Error::EmptyBand { .. })
        ));
    }

    #[test]
    fn amplitude_scale_invariance() {
        let x = tone(1.3, 30.0, 10.0, 1.0);
        let scaled: Vec<f64> = x.iter().map(|v| v * 773.25).collect();
        let a = estimate_hr_samples(&x, 30.0, BAND).unwrap();
        let b = estimate_hr_samples(&scaled, 30.0, BAND).unwrap();
        assert_eq!(a.bpm, b.bpm);
    }

    #[test]
    fn out_of_band_noise_does_not_move_the_estimate() {
        // strong out-of-band content: a 5 Hz tone and a 0.3 Hz drift
        let fs = 30.0;
        let clean = tone(1.2, fs, 20.0, 1.0);
        let noisy: Vec<f64> = clean
            .iter()
            .enumerate()
            .map(|(i, v)| {
                let t = i as f64 / fs;
                v + 3.0 * (TPI * 5.0 * t).sin() + 3.0 * (TPI * 0.3 * t).sin()
            })
            .collect();
        let a = estimate_hr_samples(&clean, fs, BAND).unwrap();
        let b = estimate_hr_samples(&noisy, fs, BAND).unwrap();
        assert_eq!(a.bpm, b.bpm);
    }

    #[test]
    fn weak_inband_noise_does_not_move_the_estimate() {
        let mut rng = Lcg64::new(99);
        let clean = tone(1.2, 30.0, 20.0, 1.0);
        let noisy: Vec<f64> = clean.iter().map(|v| v + 0.05 * rng.gauss()).collect();
        let a = estimate_hr_samples(&clean, 30.0, BAND).unwrap();
        let b = estimate_hr_samples(&noisy, 30.0, BAND).unwrap();
        assert!((a.bpm - b.bpm).abs() <= 0.5);
    }

    #[test]
    fn estimate_always_inside_band() {
        let mut rng = Lcg64::new(7);
        for _ in 0..50 {
            let x: Vec<f64> = (0..300).map(|_| rng.gauss()).collect();
            let est = estimate_hr_samples(&x, 30.0, BAND).unwrap();
            assert!(est.bpm >= BAND.0 * 60.0 - 1e-9 && est.bpm <= BAND.1 * 60.0 + 1e-9);
        }
    }

    #[test]
    fn stationary_series_is_flat_with_21_windows() {
        let p = pulse(tone(1.2, 30.0, 30.0, 1.0), 30.0);
        let series = hr_over_time(&p, 10.0, 1.0, BAND).unwrap();
        assert_eq!(series.bpm.len(), 21);
        assert!(series.times.windows(2).all(|w| w[1] > w[0]));
        for b in &series.bpm {
            assert!((b - 72.0).abs() <= 0.5, "bpm {b}");
        }
    }

    #[test]
    fn stepped_rate_transitions_between_plateaus() {
        // phase-continuous 60 -> 90 BPM step at 30 s
        let profile = HrProfile::Steps(vec![(0.0, 60.0), (30.0, 90.0)]);
        let fs = 30.0;
        let n = (60.0 * fs) as usize;
        let x: Vec<f64> = (0..n)
            .map(|i| profile.phase_at(i as f64 / fs).sin())
            .collect();
        let series = hr_over_time(&pulse(x, fs), 10.0, 1.0, BAND).unwrap();
        let k = series.bpm.len();
        // plateaus near the ends, monotone non-decreasing through the step
        for b in &series.bpm[..10] {
            assert!((b - 60.0).abs() <= 1.0, "head {b}");
        }
        for b in &series.bpm[k - 10..] {
            assert!((b - 90.0).abs() <= 1.0, "tail {b}");
        }
        for w in series.bpm.windows(2) {
            assert!(w[1] >= w[0] - 1.0, "non-monotone step {} -> {}", w[0], w[1]);
        }
    }

    #[test]
    fn window_longer_than_signal_rejected() {
        let p = pulse(tone(1.2, 30.0, 5.0, 1.0), 30.0);
        assert!(matches!(
            hr_over_time(&p, 10.0, 1.0, BAND),
            Err(Error::WindowTooLong { .. })
        ));
    }

    #[test]
    fn series_csv_is_writable() {
        let p = pulse(tone(1.2, 30.0, 12.0, 1.0), 30.0);
        let series = hr_over_time(&p, 10.0, 1.0, BAND).unwrap();
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("hr.csv");
        save_hr_series_csv(&series, &path).unwrap();
        let text = std::fs::read_to_string(&path).unwrap();
        assert!(text.starts_with("t,bpm\n"));
        assert_eq!(text.lines().count(), series.bpm.len() + 1);
    }
}
