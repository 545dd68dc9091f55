//! Weighted spatial averaging: reduce each frame to a single RGB triple
//! under its weight mask and assemble the per-video trace.

use std::fs;
use std::path::Path;

use crate::error::{Error, Result};
use crate::image::FrameImage;
use crate::maskgen::WeightMask;

/// Per-channel time series of weighted frame means.
///
/// Frames whose mask carried zero total weight are interpolated from their
/// valid neighbors and flagged in `valid`; `frames_missed` counts them.
#[derive(Debug, Clone, PartialEq)]
pub struct RgbTrace {
    pub r: Vec<f64>,
    pub g: Vec<f64>,
    pub b: Vec<f64>,
    pub fps: f64,
    pub valid: Vec<bool>,
    pub frames_missed: usize,
}

impl RgbTrace {
    pub fn len(&self) -> usize {
        self.g.len()
    }

    pub fn is_empty(&self) -> bool {
        self.g.is_empty()
    }

    pub fn channel(&self, c: usize) -> &[f64] {
        match c {
            0 => &self.r,
            1 => &self.g,
            _ => &self.b,
        }
    }
}

/// Weighted mean color of one frame. Returns `None` when the mask has zero
/// total weight (segmentation failure for this frame).
pub fn weighted_mean(frame: &FrameImage, mask: &WeightMask) -> Result<Option<[f64; 3]>> {
    if !mask.dims_match(frame.width, frame.height) {
        return Err(Error::DimensionMismatch(format!(
            "frame {}x{} vs mask {}x{}",
            frame.width, frame.height, mask.width, mask.height
        )));
    }
    let mut acc = [0.0f64; 3];
    let mut total = 0.0f64;
    for (rgb, &w) in frame.data.chunks_exact(3).zip(mask.weights.iter()) {
        if w == 0.0 {
            continue;
        }
        acc[0] += w * rgb[0] as f64;
        acc[1] += w * rgb[1] as f64;
        acc[2] += w * rgb[2] as f64;
        total += w;
    }
    if total == 0.0 {
        return Ok(None);
    }
    Ok(Some([acc[0] / total, acc[1] / total, acc[2] / total]))
}

/// Assemble a trace from per-frame means, filling missing frames by linear
/// interpolation between the nearest valid neighbors (edges copy the nearest
/// valid value). Errors when no frame is valid at all.
pub fn assemble_trace(means: &[Option<[f64; 3]>], fps: f64) -> Result<RgbTrace> {
    if fps <= 0.0 || fps.is_nan() {
        return Err(Error::Validation(format!(
            "fps must be positive, got {fps}"
        )));
    }
    let n = means.len();
    let valid: Vec<bool> = means.iter().map(|m| m.is_some()).collect();
    let frames_missed = valid.iter().filter(|&&v| !v).count();
    if frames_missed == n {
        return Err(Error::NoValidFrames);
    }

    let mut channels = [vec![0.0; n], vec![0.0; n], vec![0.0; n]];
    for (i, m) in means.iter().enumerate() {
        if let Some(rgb) = m {
            for (ch, v) in channels.iter_mut().zip(rgb) {
                ch[i] = *v;
            }
        }
    }

    // Fill gaps channel-wise. Valid indices bracket each gap; edge gaps
    // take the nearest valid value.
    let valid_idx: Vec<usize> = (0..n).filter(|&i| valid[i]).collect();
    for ch in &mut channels {
        let first = valid_idx[0];
        for i in 0..first {
            ch[i] = ch[first];
        }
        let last = *valid_idx.last().unwrap();
        for i in (last + 1)..n {
            ch[i] = ch[last];
        }
        for w in valid_idx.windows(2) {
            let (a, b) = (w[0], w[1]);
            if b - a <= 1 {
                continue;
            }
            let span = (b - a) as f64;
            for i in (a + 1)..b {
                let frac = (i - a) as f64 / span;
                ch[i] = ch[a] * (1.0 - frac) + ch[b] * frac;
            }
        }
    }

    let [r, g, b] = channels;
    Ok(RgbTrace {
        r,
        g,
        b,
        fps,
        valid,
        frames_missed,
    })
}

/// Weighted-mean every frame under its mask, then assemble the trace.
pub fn build_trace(frames: &[FrameImage], masks: &[WeightMask], fps: f64) -> Result<RgbTrace> {
    if frames.len() != masks.len() {
        return Err(Error::LengthMismatch(frames.len(), masks.len()));
    }
    let means = frames
        .iter()
        .zip(masks.iter())
        .map(|(f, m)| weighted_mean(f, m))
        .collect::<Result<Vec<_>>>()?;
    assemble_trace(&means, fps)
}

/// Write a trace as CSV with header `frame,t,r,g,b,valid`.
pub fn save_trace_csv(trace: &RgbTrace, path: &Path) -> Result<()> {
    let mut out = String::from("frame,t,r,g,b,valid\n");
    for i in 0..trace.len() {
        out.push_str(&format!(
            "{},{:.9},{:.6},{:.6},{:.6},{}\n",
            i,
            i as f64 / trace.fps,
            trace.r[i],
            trace.g[i],
            trace.b[i],
            if trace.valid[i] { 1 } else { 0 },
        ));
    }
    fs::write(path, out).map_err(|e| Error::io(path, e))
}

/// Read a trace CSV written by [`save_trace_csv`]. The sample rate is
/// recovered from the `t` column unless `fps_override` is given.
pub fn load_trace_csv(path: &Path, fps_override: Option<f64>) -> Result<RgbTrace> {
    let text = fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    let mut r = Vec::new();
    let mut g = Vec::new();
    let mut b = Vec::new();
    let mut valid = Vec::new();
    let mut times = Vec::new();
    for (line_no, line) in text.lines().enumerate().skip(1) {
        let line = line.trim();
        if line.is_empty() {
            continue;
        }
        let f: Vec<&str> = line.split(',').collect();
        if f.len() != 6 {
            return Err(Error::parse(
                path,
                format!("line {}: expected 6 fields", line_no + 1),
            ));
        }
        let num = |s: &str| -> Result<f64> {
            s.trim()
                .parse()
                .map_err(|_| Error::parse(path, format!("line {}: bad number {s:?}", line_no + 1)))
        };
        times.push(num(f[1])?);
        r.push(num(f[2])?);
        g.push(num(f[3])?);
        b.push(num(f[4])?);
        valid.push(matches!(f[5].trim(), "1" | "true"));
    }
    if r.is_empty() {
        return Err(Error::EmptySignal);
    }
    let fps = match fps_override {
        Some(f) => f,
        None => {
            let span = times[times.len() - 1] - times[0];
            if times.len() < 2 || span <= 0.0 {
                return Err(Error::Validation(
                    "cannot infer fps from a single-row trace; pass it explicitly".into(),
                ));
            }
            (times.len() - 1) as f64 / span
        }
    };
    let frames_missed = valid.iter().filter(|&&v| !v).count();
    Ok(RgbTrace {
        r,
        g,
        b,
        fps,
        valid,
        frames_missed,
    })
}
