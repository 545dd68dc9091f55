//! Pulse extraction: turn an RGB trace into a 1-D pulse waveform.
//!
//! Seven conventional algorithms share the detrending and band-pass
//! machinery here. All of them are deterministic and length-preserving;
//! the chrominance-normalized ones are also invariant to static
//! per-channel gains.

use std::fs;
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::filter;
use crate::linalg;
use crate::spectrum;
use crate::stats::{mean, pstd};
use crate::trace::RgbTrace;

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Serialize, Deserialize)]
pub enum Method {
    #[serde(rename = "GREEN")]
    Green,
    #[serde(rename = "CHROM")]
    Chrom,
    #[serde(rename = "POS")]
    Pos,
    #[serde(rename = "PBV")]
    Pbv,
    #[serde(rename = "LGI")]
    Lgi,
    #[serde(rename = "PCA")]
    Pca,
    #[serde(rename = "OMIT")]
    Omit,
}

impl Method {
    pub const ALL: [Method; 7] = [
        Method::Green,
        Method::Chrom,
        Method::Pos,
        Method::Pbv,
        Method::Lgi,
        Method::Pca,
        Method::Omit,
    ];

    pub fn name(&self) -> &'static str {
        match self {
            Method::Green => "GREEN",
            Method::Chrom => "CHROM",
            Method::Pos => "POS",
            Method::Pbv => "PBV",
            Method::Lgi => "LGI",
            Method::Pca => "PCA",
            Method::Omit => "OMIT",
        }
    }
}

impl std::fmt::Display for Method {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(self.name())
    }
}

impl std::str::FromStr for Method {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_uppercase().as_str() {
            "GREEN" => Ok(Method::Green),
            "CHROM" => Ok(Method::Chrom),
            "POS" => Ok(Method::Pos),
            "PBV" => Ok(Method::Pbv),
            "LGI" => Ok(Method::Lgi),
            "PCA" => Ok(Method::Pca),
            "OMIT" => Ok(Method::Omit),
            other => Err(Error::Validation(format!("unknown method {other:?}"))),
        }
    }
}

/// Extracted pulse waveform at the video frame rate.
#[derive(Debug, Clone, PartialEq)]
pub struct PulseSignal {
    pub samples: Vec<f64>,
    pub fps: f64,
    pub method: Method,
}

/// Band-pass parameters. Valid when `0 < lo_hz < hi_hz < fps / 2`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct BandPassSpec {
    pub lo_hz: f64,
    pub hi_hz: f64,
    pub order: usize,
}

impl Default for BandPassSpec {
    fn default() -> Self {
        // 39..198 BPM: the physiological range with margin
        BandPassSpec {
            lo_hz: 0.65,
            hi_hz: 3.3,
            order: 2,
        }
    }
}

impl BandPassSpec {
    pub fn band(&self) -> (f64, f64) {
        (self.lo_hz, self.hi_hz)
    }
}

/// Shared extraction parameters.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ExtractOpts {
    pub band: BandPassSpec,
    /// Moving-average detrend window in seconds.
    pub detrend_window_s: f64,
    /// Sliding-window length for the projection-plane method, in seconds.
    pub pos_window_s: f64,
}

impl Default for ExtractOpts {
    fn default() -> Self {
        ExtractOpts {
            band: BandPassSpec::default(),
            detrend_window_s: 1.0,
            pos_window_s: 1.6,
        }
    }
}

/// Subtract a centered moving average (window rounded to an odd sample
/// count). Windows wrap circularly at the signal ends, which keeps the
/// averaging operator mean-preserving: the output mean is zero up to
/// rounding for any input.
pub fn detrend(x: &[f64], window_s: f64, fps: f64) -> Result<Vec<f64>> {
    let w = (window_s * fps).round() as usize;
    if w < 3 {
        return Err(Error::Validation(format!(
            "detrend window of {w} samples is too short (need >= 3)"
        )));
    }
    if w > x.len() {
        return Err(Error::WindowTooLong {
            window: w,
            len: x.len(),
        });
    }
    let half = w / 2;
    let n = x.len();
    let mut prefix = vec![0.0; n + 1];
    for i in 0..n {
        prefix[i + 1] = prefix[i] + x[i];
    }
    let span = (2 * half + 1) as f64;
    let out = (0..n)
        .map(|i| {
            let lo = i as isize - half as isize;
            let hi = i + half;
            // at most one side wraps since the window fits in the signal
            let sum = if lo < 0 {
                (prefix[n] - prefix[(n as isize + lo) as usize]) + prefix[hi + 1]
            } else if hi >= n {
                (prefix[n] - prefix[lo as usize]) + prefix[hi + 1 - n]
            } else {
                prefix[hi + 1] - prefix[lo as usize]
            };
            x[i] - sum / span
        })
        .collect();
    Ok(out)
}

/// Zero-phase Butterworth band-pass.
pub fn bandpass(x: &[f64], spec: &BandPassSpec, fps: f64) -> Result<Vec<f64>> {
    let sos = filter::butter_bandpass(spec.order, spec.lo_hz, spec.hi_hz, fps)?;
    Ok(filter::sosfiltfilt(&sos, x))
}

fn centered_rows(trace: &RgbTrace) -> [Vec<f64>; 3] {
    let center = |x: &[f64]| {
        let m = mean(x);
        x.iter().map(|v| v - m).collect::<Vec<f64>>()
    };
    [center(&trace.r), center(&trace.g), center(&trace.b)]
}

fn frobenius_sq(rows: &[Vec<f64>; 3]) -> f64 {
    rows.iter()
        .map(|r| r.iter().map(|v| v * v).sum::<f64>())
        .sum()
}

/// Green channel baseline: detrend then band-pass.
pub fn extract_green(trace: &RgbTrace, opts: &ExtractOpts) -> Result<PulseSignal> {
    let detrended = detrend(&trace.g, opts.detrend_window_s, trace.fps)?;
    let samples = bandpass(&detrended, &opts.band, trace.fps)?;
    Ok(PulseSignal {
        samples,
        fps: trace.fps,
        method: Method::Green,
    })
}

/// Chrominance projection: gain-normalized channels combined into two
/// orthogonal chrominance signals, band-passed, then alpha-tuned.
pub fn extract_chrom(trace: &RgbTrace, opts: &ExtractOpts) -> Result<PulseSignal> {
    let n = trace.len();
    let (mr, mg, mb) = (mean(&trace.r), mean(&trace.g), mean(&trace.b));
    for (m, name) in [(mr, "r"), (mg, "g"), (mb, "b")] {
        if m.abs() < 1e-12 {
            return Err(Error::ZeroMeanChannel(name));
        }
    }
    let mut x = vec![0.0; n];
    let mut y = vec![0.0; n];
    for i in 0..n {
        let rn = trace.r[i] / mr;
        let gn = trace.g[i] / mg;
        let bn = trace.b[i] / mb;
        x[i] = 3.0 * rn - 2.0 * gn;
        y[i] = 1.5 * rn + gn - 1.5 * bn;
    }
    let xf = bandpass(&x, &opts.band, trace.fps)?;
    let yf = bandpass(&y, &opts.band, trace.fps)?;
    let sy = pstd(&yf);
    let alpha = if sy > 0.0 { pstd(&xf) / sy } else { 0.0 };
    let samples = xf
        .iter()
        .zip(yf.iter())
        .map(|(a, b)| a - alpha * b)
        .collect();
    Ok(PulseSignal {
        samples,
        fps: trace.fps,
        method: Method::Chrom,
    })
}

/// Projection onto the plane orthogonal to the skin tone, over sliding
/// windows with per-window gain normalization and overlap-add.
pub fn extract_pos(trace: &RgbTrace, opts: &ExtractOpts) -> Result<PulseSignal> {
    let n = trace.len();
    let l = (opts.pos_window_s * trace.fps).round() as usize;
    if l > n {
        return Err(Error::WindowTooLong { window: l, len: n });
    }
    if l < 2 {
        return Err(Error::Validation(format!(
            "projection window of {l} samples is too short"
        )));
    }

    let mut out = vec![0.0; n];
    let mut s1 = vec![0.0; l];
    let mut s2 = vec![0.0; l];
    for start in 0..=(n - l) {
        let win = start..start + l;
        let norms: Vec<[f64; 3]> = {
            let mr = mean(&trace.r[win.clone()]);
            let mg = mean(&trace.g[win.clone()]);
            let mb = mean(&trace.b[win.clone()]);
            // an all-zero window normalizes to zeros and contributes nothing
            let div = |v: f64, m: f64| if m != 0.0 { v / m } else { 0.0 };
            win.clone()
                .map(|i| {
                    [
                        div(trace.r[i], mr),
                        div(trace.g[i], mg),
                        div(trace.b[i], mb),
                    ]
                })
                .collect()
        };
        for (j, c) in norms.iter().enumerate() {
            s1[j] = c[1] - c[2];
            s2[j] = -2.0 * c[0] + c[1] + c[2];
        }
        let sd2 = pstd(&s2);
        let alpha = if sd2 > 0.0 { pstd(&s1) / sd2 } else { 0.0 };
        let h: Vec<f64> = s1
            .iter()
            .zip(s2.iter())
            .map(|(a, b)| a + alpha * b)
            .collect();
        let mh = mean(&h);
        for (j, v) in h.iter().enumerate() {
            out[start + j] += v - mh;
        }
    }
    Ok(PulseSignal {
        samples: out,
        fps: trace.fps,
        method: Method::Pos,
    })
}

/// Blood-volume signature method: solve the Gram system for the weighting
/// that isolates the pulse direction, falling back to a pseudo-inverse when
/// the Gram matrix is singular.
pub fn extract_pbv(trace: &RgbTrace, _opts: &ExtractOpts) -> Result<PulseSignal> {
    let n = trace.len();
    if n == 0 {
        return Err(Error::EmptySignal);
    }
    let normalized: [Vec<f64>; 3] = {
        let norm = |x: &[f64]| -> Result<Vec<f64>> {
            let m = mean(x);
            if m.abs() < 1e-12 {
                return Err(Error::ZeroMeanChannel("channel"));
            }
            Ok(x.iter().map(|v| v / m - 1.0).collect())
        };
        [norm(&trace.r)?, norm(&trace.g)?, norm(&trace.b)?]
    };

    let sig = [
        pstd(&normalized[0]),
        pstd(&normalized[1]),
        pstd(&normalized[2]),
    ];
    let norm = (sig[0] * sig[0] + sig[1] * sig[1] + sig[2] * sig[2]).sqrt();
    if norm == 0.0 {
        return Ok(PulseSignal {
            samples: vec![0.0; n],
            fps: trace.fps,
            method: Method::Pbv,
        });
    }
    let pbv = [sig[0] / norm, sig[1] / norm, sig[2] / norm];

    let mut gram = [[0.0; 3]; 3];
    for i in 0..3 {
        for j in i..3 {
            let g: f64 = normalized[i]
                .iter()
                .zip(normalized[j].iter())
                .map(|(a, b)| a * b)
                .sum();
            gram[i][j] = g;
            gram[j][i] = g;
        }
    }
    let w = linalg::solve3(&gram, &pbv).unwrap_or_else(|| linalg::pinv_solve_sym3(&gram, &pbv));

    let mut samples: Vec<f64> = (0..n)
        .map(|i| w[0] * normalized[0][i] + w[1] * normalized[1][i] + w[2] * normalized[2][i])
        .collect();
    let sd = pstd(&samples);
    if sd > 0.0 {
        for v in &mut samples {
            *v /= sd;
        }
    }
    Ok(PulseSignal {
        samples,
        fps: trace.fps,
        method: Method::Pbv,
    })
}

/// Residual of the centered rows after projecting out the dominant color
/// direction `u` (first left singular vector): `S = (I - u u^T) C`.
fn lgi_project(rows: &[Vec<f64>; 3]) -> ([Vec<f64>; 3], [f64; 3]) {
    let mut outer = [[0.0; 3]; 3];
    for i in 0..3 {
        for j in i..3 {
            let g: f64 = rows[i].iter().zip(rows[j].iter()).map(|(a, b)| a * b).sum();
            outer[i][j] = g;
            outer[j][i] = g;
        }
    }
    let (_vals, vecs) = linalg::sym_eigen3(&outer);
    let u = vecs[0];

    let n = rows[0].len();
    let mut resid = [vec![0.0; n], vec![0.0; n], vec![0.0; n]];
    for i in 0..n {
        let proj = u[0] * rows[0][i] + u[1] * rows[1][i] + u[2] * rows[2][i];
        for c in 0..3 {
            resid[c][i] = rows[c][i] - u[c] * proj;
        }
    }
    (resid, u)
}

/// Local group invariance: project out the dominant color direction (first
/// left singular vector of the centered trace) and band-pass the green row
/// of the residual.
pub fn extract_lgi(trace: &RgbTrace, opts: &ExtractOpts) -> Result<PulseSignal> {
    let rows = centered_rows(trace);
    if frobenius_sq(&rows) < 1e-20 {
        return Err(Error::RankDeficient("trace has zero variance".into()));
    }
    let (resid, _u) = lgi_project(&rows);
    let samples = bandpass(&resid[1], &opts.band, trace.fps)?;
    Ok(PulseSignal {
        samples,
        fps: trace.fps,
        method: Method::Lgi,
    })
}

/// Principal components of the centered trace, band-passed; the component
/// with the strongest in-band spectral peak wins.
pub fn extract_pca(trace: &RgbTrace, opts: &ExtractOpts) -> Result<PulseSignal> {
    let rows = centered_rows(trace);
    let n = trace.len();
    if n == 0 {
        return Err(Error::EmptySignal);
    }
    let mut cov = [[0.0; 3]; 3];
    for i in 0..3 {
        for j in i..3 {
            let g: f64 = rows[i]
                .iter()
                .zip(rows[j].iter())
                .map(|(a, b)| a * b)
                .sum::<f64>()
                / n as f64;
            cov[i][j] = g;
            cov[j][i] = g;
        }
    }
    let (vals, vecs) = linalg::sym_eigen3(&cov);
    if vals[0] <= 1e-20 {
        return Err(Error::RankDeficient("zero covariance".into()));
    }

    let nfft = spectrum::default_nfft(trace.fps, n);
    let mut best: Option<(f64, Vec<f64>)> = None;
    for v in &vecs {
        let proj: Vec<f64> = (0..n)
            .map(|i| v[0] * rows[0][i] + v[1] * rows[1][i] + v[2] * rows[2][i])
            .collect();
        let filtered = bandpass(&proj, &opts.band, trace.fps)?;
        let spec = spectrum::periodogram_hann(&filtered, trace.fps, nfft);
        let peak = spec
            .band_peak(opts.band.lo_hz, opts.band.hi_hz)
            .map(|(_, p)| p)
            .unwrap_or(0.0);
        match &best {
            Some((best_peak, _)) if peak <= *best_peak => {}
            _ => best = Some((peak, filtered)),
        }
    }
    let (_, samples) = best.expect("three components evaluated");
    Ok(PulseSignal {
        samples,
        fps: trace.fps,
        method: Method::Pca,
    })
}

/// Green component orthogonal to the first Gram-Schmidt basis direction of
/// the centered columns (the second orthonormal component scaled back to
/// data units). `Err` carries the rank-deficiency reason.
fn omit_residual(rows: &[Vec<f64>; 3]) -> std::result::Result<Vec<f64>, &'static str> {
    let norm = |x: &[f64]| x.iter().map(|v| v * v).sum::<f64>().sqrt();
    let r_norm = norm(&rows[0]);
    if r_norm < 1e-12 {
        return Err("first channel has no variance");
    }
    let coef: f64 = rows[0]
        .iter()
        .zip(rows[1].iter())
        .map(|(a, b)| a * b)
        .sum::<f64>()
        / (r_norm * r_norm);
    let g_perp: Vec<f64> = rows[1]
        .iter()
        .zip(rows[0].iter())
        .map(|(g, r)| g - coef * r)
        .collect();
    if norm(&g_perp) <= 1e-8 * norm(&rows[1]).max(1e-300) {
        return Err("green is collinear with the first basis direction");
    }
    Ok(g_perp)
}

/// Orthonormalization method: Gram-Schmidt over the centered channel
/// columns; the output is the green component orthogonal to the first basis
/// direction, scaled back to data units and band-passed. Rank-deficient
/// traces fall back to the green baseline with a warning.
pub fn extract_omit(trace: &RgbTrace, opts: &ExtractOpts) -> Result<PulseSignal> {
    let rows = centered_rows(trace);
    match omit_residual(&rows) {
        Ok(g_perp) => {
            let samples = bandpass(&g_perp, &opts.band, trace.fps)?;
            Ok(PulseSignal {
                samples,
                fps: trace.fps,
                method: Method::Omit,
            })
        }
        Err(reason) => {
            log::warn!("rank-deficient trace ({reason}); falling back to GREEN");
            let mut pulse = extract_green(trace, opts)?;
            pulse.method = Method::Omit;
            Ok(pulse)
        }
    }
}

/// Run one extraction method.
pub fn extract(method: Method, trace: &RgbTrace, opts: &ExtractOpts) -> Result<PulseSignal> {
    match method {
        Method::Green => extract_green(trace, opts),
        Method::Chrom => extract_chrom(trace, opts),
        Method::Pos => extract_pos(trace, opts),
        Method::Pbv => extract_pbv(trace, opts),
        Method::Lgi => extract_lgi(trace, opts),
        Method::Pca => extract_pca(trace, opts),
        Method::Omit => extract_omit(trace, opts),
    }
}

/// Write a pulse as CSV with header `t,value,method`.
pub fn save_pulse_csv(pulse: &PulseSignal, path: &Path) -> Result<()> {
    let mut out = String::from("t,value,method\n");
    for (i, v) in pulse.samples.iter().enumerate() {
        out.push_str(&format!(
            "{:.9},{:.9},{}\n",
            i as f64 / pulse.fps,
            v,
            pulse.method
        ));
    }
    fs::write(path, out).map_err(|e| Error::io(path, e))
}

/// Read a pulse CSV written by [`save_pulse_csv`].
pub fn load_pulse_csv(path: &Path, fps_override: Option<f64>) -> Result<PulseSignal> {
    let text = fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    let mut samples = Vec::new();
    let mut times = Vec::new();
    let mut method = Method::Green;
    for (line_no, line) in text.lines().enumerate().skip(1) {
        let line = line.trim();
        if line.is_empty() {
            continue;
        }
        let f: Vec<&str> = line.split(',').collect();
        if f.len() != 3 {
            return Err(Error::parse(
                path,
                format!("line {}: expected 3 fields", line_no + 1),
            ));
        }
        let num = |s: &str| -> Result<f64> {
            s.trim()
                .parse()
                .map_err(|_| Error::parse(path, format!("line {}: bad number {s:?}", line_no + 1)))
        };
        times.push(num(f[0])?);
        samples.push(num(f[1])?);
        method = f[2].trim().parse()?;
    }
    if samples.is_empty() {
        return Err(Error::EmptySignal);
    }
    let fps = match fps_override {
        Some(f) => f,
        None => {
            let span = times[times.len() - 1] - times[0];
            if times.len() < 2 || span <= 0.0 {
                return Err(Error::Validation(
                    "cannot infer fps from a single-row pulse; pass it explicitly".into(),
                ));
            }
            (times.len() - 1) as f64 / span
        }
    };
    Ok(PulseSignal {
        samples,
        fps,
        method,
    })
}
