//! Dataset loading: manifests, frame sequences, and ground-truth pulse
//! signals (single-sensor CSV, synchronized dual-sensor CSV, and the
//! three-row whitespace format used by some public recordings).

use std::collections::BTreeSet;
use std::fs;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::image::FrameImage;

pub const MANIFEST_SCHEMA_VERSION: u32 = 1;

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Scenario {
    Rest,
    Talk,
    Rotation,
    Exercise,
    Arithmetic,
    Other,
}

impl std::fmt::Display for Scenario {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        let s = match self {
            Scenario::Rest => "rest",
            Scenario::Talk => "talk",
            Scenario::Rotation => "rotation",
            Scenario::Exercise => "exercise",
            Scenario::Arithmetic => "arithmetic",
            Scenario::Other => "other",
        };
        f.write_str(s)
    }
}

/// Skin-tone annotation labels used to stratify segmentation metrics.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SkinTone {
    Light,
    Dark,
    Unsure,
    Nan,
}

impl std::fmt::Display for SkinTone {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        let s = match self {
            SkinTone::Light => "light",
            SkinTone::Dark => "dark",
            SkinTone::Unsure => "unsure",
            SkinTone::Nan => "nan",
        };
        f.write_str(s)
    }
}

impl std::str::FromStr for SkinTone {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s.trim() {
            "light" => Ok(SkinTone::Light),
            "dark" => Ok(SkinTone::Dark),
            "unsure" => Ok(SkinTone::Unsure),
            "nan" => Ok(SkinTone::Nan),
            other => Err(Error::Validation(format!("unknown skin tone {other:?}"))),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum GtFormat {
    /// Header `t,value`: one timestamped sensor column.
    CsvTimed,
    /// Header `t,value1,value2`: two synchronized sensors, fused by mean.
    CsvDual,
    /// Three whitespace-separated rows: waveform, heart rate, timestep.
    Ubfc1,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct GroundTruthRef {
    pub path: PathBuf,
    pub format: GtFormat,
    pub rate_hz: f64,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct VideoRecord {
    pub id: String,
    pub scenario: Scenario,
    /// Frame pattern relative to the manifest directory. Either a directory
    /// or a filename containing `*`, e.g. `frames/s1/frame_*.png`.
    pub frames: PathBuf,
    pub fps: f64,
    #[serde(default)]
    pub gt: Vec<GroundTruthRef>,
    #[serde(default)]
    pub landmarks: Option<PathBuf>,
    #[serde(default)]
    pub external_masks: Option<PathBuf>,
    #[serde(default)]
    pub skin_tone: Option<SkinTone>,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct DatasetManifest {
    pub schema_version: u32,
    pub records: Vec<VideoRecord>,
}

/// Uniformly sampled pulse waveform from a contact sensor.
#[derive(Debug, Clone, PartialEq)]
pub struct PpgSignal {
    pub samples: Vec<f64>,
    pub rate_hz: f64,
    /// Time of the first sample in seconds.
    pub t0: f64,
}

impl PpgSignal {
    pub fn duration_s(&self) -> f64 {
        if self.samples.len() < 2 {
            return 0.0;
        }
        (self.samples.len() - 1) as f64 / self.rate_hz
    }
}

/// Load a manifest, resolve its relative paths against the manifest
/// directory, and validate every record (unique ids, positive fps, at least
/// one frame on disk per pattern).
pub fn load_manifest(path: &Path) -> Result<DatasetManifest> {
    let text = fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    let mut manifest: DatasetManifest =
        serde_json::from_str(&text).map_err(|e| Error::parse(path, e.to_string()))?;

    if manifest.schema_version != MANIFEST_SCHEMA_VERSION {
        return Err(Error::Validation(format!(
            "unsupported manifest schema_version {} (expected {})",
            manifest.schema_version, MANIFEST_SCHEMA_VERSION
        )));
    }

    let base = path.parent().unwrap_or_else(|| Path::new("."));
    let mut seen = BTreeSet::new();
    for rec in &mut manifest.records {
        if !seen.insert(rec.id.clone()) {
            return Err(Error::Validation(format!(
                "duplicate record id {:?}",
                rec.id
            )));
        }
        if rec.fps <= 0.0 || rec.fps.is_nan() {
            return Err(Error::Validation(format!(
                "record {:?} has nonpositive fps {}",
                rec.id, rec.fps
            )));
        }
        rec.frames = base.join(&rec.frames);
        for gt in &mut rec.gt {
            if gt.rate_hz <= 0.0 || gt.rate_hz.is_nan() {
                return Err(Error::Validation(format!(
                    "record {:?} ground truth has nonpositive rate {}",
                    rec.id, gt.rate_hz
                )));
            }
            gt.path = base.join(&gt.path);
        }
        if let Some(p) = &rec.landmarks {
            rec.landmarks = Some(base.join(p));
        }
        if let Some(p) = &rec.external_masks {
            rec.external_masks = Some(base.join(p));
        }
        let matched = match_frame_pattern(&rec.frames)?;
        if matched.is_empty() {
            return Err(Error::NoFramesMatch(rec.frames.display().to_string()));
        }
    }
    Ok(manifest)
}

pub fn save_manifest(manifest: &DatasetManifest, path: &Path) -> Result<()> {
    let text =
        serde_json::to_string_pretty(manifest).map_err(|e| Error::parse(path, e.to_string()))?;
    fs::write(path, text).map_err(|e| Error::io(path, e))
}

type NameMatcher = Box<dyn Fn(&str) -> bool>;

/// Files matching a frame pattern, ordered by the numeric index embedded in
/// the filename (last run of ASCII digits in the stem). The order depends
/// only on names, never on directory enumeration order.
pub fn match_frame_pattern(pattern: &Path) -> Result<Vec<PathBuf>> {
    let (dir, matcher): (PathBuf, NameMatcher) = if pattern.is_dir() {
        let ok = |name: &str| {
            let lower = name.to_ascii_lowercase();
            lower.ends_with(".png") || lower.ends_with(".jpg") || lower.ends_with(".jpeg")
        };
        (pattern.to_path_buf(), Box::new(ok))
    } else {
        let file_pat = pattern
            .file_name()
            .and_then(|s| s.to_str())
            .ok_or_else(|| Error::Validation(format!("bad frame pattern {}", pattern.display())))?
            .to_string();
        let dir = pattern
            .parent()
            .unwrap_or_else(|| Path::new("."))
            .to_path_buf();
        match file_pat.split_once('*') {
            Some((prefix, suffix)) => {
                let (p, s) = (prefix.to_string(), suffix.to_string());
                let ok = move |name: &str| {
                    name.len() >= p.len() + s.len() && name.starts_with(&p) && name.ends_with(&s)
                };
                (dir, Box::new(ok))
            }
            None => {
                let exact = file_pat.clone();
                (dir, Box::new(move |name: &str| name == exact))
            }
        }
    };

    let entries = fs::read_dir(&dir).map_err(|e| Error::io(&dir, e))?;
    let mut files: Vec<(u64, String, PathBuf)> = Vec::new();
    for entry in entries {
        let entry = entry.map_err(|e| Error::io(&dir, e))?;
        let path = entry.path();
        if !path.is_file() {
            continue;
        }
        let Some(name) = path.file_name().and_then(|s| s.to_str()) else {
            continue;
        };
        if matcher(name) {
            let idx = filename_index(name).unwrap_or(u64::MAX);
            files.push((idx, name.to_string(), path));
        }
    }
    files.sort_by(|a, b| a.0.cmp(&b.0).then_with(|| a.1.cmp(&b.1)));
    Ok(files.into_iter().map(|(_, _, p)| p).collect())
}

/// Numeric frame index: the last run of digits in the file stem.
pub fn filename_index(name: &str) -> Option<u64> {
    let stem = name.rsplit_once('.').map(|(s, _)| s).unwrap_or(name);
    let bytes = stem.as_bytes();
    let mut end = bytes.len();
    while end > 0 && !bytes[end - 1].is_ascii_digit() {
        end -= 1;
    }
    if end == 0 {
        return None;
    }
    let mut start = end;
    while start > 0 && bytes[start - 1].is_ascii_digit() {
        start -= 1;
    }
    stem[start..end].parse().ok()
}

/// Load and order the frame sequence of a record. All frames must share the
/// same dimensions.
pub fn load_frames(record: &VideoRecord) -> Result<Vec<FrameImage>> {
    let paths = match_frame_pattern(&record.frames)?;
    if paths.is_empty() {
        return Err(Error::NoFramesMatch(record.frames.display().to_string()));
    }
    let mut frames = Vec::with_capacity(paths.len());
    let mut dims: Option<(u32, u32)> = None;
    for path in &paths {
        let frame = FrameImage::load(path)?;
        match dims {
            None => dims = Some((frame.width, frame.height)),
            Some((w, h)) if (w, h) != (frame.width, frame.height) => {
                return Err(Error::DimensionMismatch(format!(
                    "{} is {}x{}, expected {}x{}",
                    path.display(),
                    frame.width,
                    frame.height,
                    w,
                    h
                )));
            }
            _ => {}
        }
        frames.push(frame);
    }
    Ok(frames)
}

pub fn video_duration_s(frame_count: usize, fps: f64) -> f64 {
    frame_count as f64 / fps
}

/// Load a ground-truth pulse signal in its declared format. Dual-sensor
/// files are fused per-sample as the mean of both columns.
pub fn load_ppg(gt: &GroundTruthRef) -> Result<PpgSignal> {
    let text = fs::read_to_string(&gt.path).map_err(|e| Error::io(&gt.path, e))?;
    let signal = match gt.format {
        GtFormat::CsvTimed => parse_csv_timed(&gt.path, &text, gt.rate_hz)?,
        GtFormat::CsvDual => parse_csv_dual(&gt.path, &text, gt.rate_hz)?,
        GtFormat::Ubfc1 => parse_ubfc1(&gt.path, &text, gt.rate_hz)?,
    };
    if signal.samples.is_empty() {
        return Err(Error::EmptySignal);
    }
    if let Some(bad) = signal.samples.iter().find(|v| !v.is_finite()) {
        return Err(Error::parse(&gt.path, format!("non-finite sample {bad}")));
    }
    Ok(signal)
}

fn parse_number(path: &Path, line_no: usize, field: &str) -> Result<f64> {
    field
        .trim()
        .parse::<f64>()
        .map_err(|_| Error::parse(path, format!("line {line_no}: non-numeric field {field:?}")))
}

fn data_lines(text: &str) -> impl Iterator<Item = (usize, &str)> {
    text.lines()
        .enumerate()
        .map(|(i, l)| (i + 1, l.trim()))
        .filter(|(_, l)| !l.is_empty())
}

fn parse_csv_timed(path: &Path, text: &str, rate_hz: f64) -> Result<PpgSignal> {
    let mut samples = Vec::new();
    let mut t0 = 0.0;
    for (line_no, line) in data_lines(text) {
        if line_no == 1 && line.starts_with('t') {
            continue; // header
        }
        let fields: Vec<&str> = line.split(',').collect();
        if fields.len() != 2 {
            return Err(Error::parse(
                path,
                format!("line {line_no}: expected 2 fields, got {}", fields.len()),
            ));
        }
        let t = parse_number(path, line_no, fields[0])?;
        let v = parse_number(path, line_no, fields[1])?;
        if samples.is_empty() {
            t0 = t;
        }
        samples.push(v);
    }
    Ok(PpgSignal {
        samples,
        rate_hz,
        t0,
    })
}

fn parse_csv_dual(path: &Path, text: &str, rate_hz: f64) -> Result<PpgSignal> {
    let mut s1 = Vec::new();
    let mut s2 = Vec::new();
    let mut t0 = 0.0;
    for (line_no, line) in data_lines(text) {
        if line_no == 1 && line.starts_with('t') {
            continue;
        }
        let fields: Vec<&str> = line.split(',').collect();
        if fields.len() != 3 {
            return Err(Error::parse(
                path,
                format!("line {line_no}: expected 3 fields, got {}", fields.len()),
            ));
        }
        let t = parse_number(path, line_no, fields[0])?;
        if s1.is_empty() {
            t0 = t;
        }
        s1.push(parse_number(path, line_no, fields[1])?);
        // A trailing empty second-sensor field marks a truncated recording.
        if !fields[2].trim().is_empty() {
            s2.push(parse_number(path, line_no, fields[2])?);
        }
    }
    let n = s1.len().min(s2.len());
    if n < s1.len().max(s2.len()) {
        log::warn!(
            "{}: sensor columns differ in length ({} vs {}), truncating to {}",
            path.display(),
            s1.len(),
            s2.len(),
            n
        );
    }
    let samples = (0..n).map(|i| (s1[i] + s2[i]) / 2.0).collect();
    Ok(PpgSignal {
        samples,
        rate_hz,
        t0,
    })
}

fn parse_ubfc1(path: &Path, text: &str, rate_hz: f64) -> Result<PpgSignal> {
    let rows: Vec<&str> = text.lines().filter(|l| !l.trim().is_empty()).collect();
    if rows.len() != 3 {
        return Err(Error::parse(
            path,
            format!(
                "expected 3 rows (waveform, heart rate, timestep), got {}",
                rows.len()
            ),
        ));
    }
    let mut samples = Vec::new();
    for field in rows[0].split_whitespace() {
        samples.push(parse_number(path, 1, field)?);
    }
    Ok(PpgSignal {
        samples,
        rate_hz,
        t0: 0.0,
    })
}

/// Linear resampling onto a uniform grid at `target_hz` spanning the
/// original duration. Output length is `floor(duration * target_hz) + 1`.
pub fn resample(sig: &PpgSignal, target_hz: f64) -> Result<PpgSignal> {
    if sig.samples.is_empty() {
        return Err(Error::EmptySignal);
    }
    if target_hz <= 0.0 || target_hz.is_nan() {
        return Err(Error::Validation(format!(
            "target rate must be positive, got {target_hz}"
        )));
    }
    let n = sig.samples.len();
    // length = floor(duration * target) + 1, evaluated as (n-1) * (target/src)
    // so that equal rates give a ratio of exactly 1.0 and an identity copy
    let out_len = ((n - 1) as f64 * (target_hz / sig.rate_hz)).floor() as usize + 1;
    let step = sig.rate_hz / target_hz;
    let mut out = Vec::with_capacity(out_len);
    for i in 0..out_len {
        let pos = i as f64 * step;
        let idx = pos.floor() as usize;
        if idx >= n - 1 {
            out.push(sig.samples[n - 1]);
            continue;
        }
        let frac = pos - idx as f64;
        if frac == 0.0 {
            out.push(sig.samples[idx]);
        } else {
            out.push(sig.samples[idx] * (1.0 - frac) + sig.samples[idx + 1] * frac);
        }
    }
    Ok(PpgSignal {
        samples: out,
        rate_hz: target_hz,
        t0: sig.t0,
    })
}
