//! Stage commands behind the CLI surface. Every command is a plain function
//! over paths and a [`PipelineConfig`], so tests drive them directly.

use std::collections::BTreeMap;
use std::fs;
use std::path::{Path, PathBuf};

use anyhow::{anyhow, bail, Context, Result};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use rppg_core::eval::{
    self, scatter_csv, seg_metrics, summary_csv, EvalReport, RecordError, SegMetrics, VideoEval,
    DEFAULT_SEG_TOL,
};
use rppg_core::hr::{estimate_hr_samples, hr_over_time, save_hr_series_csv, HrEstimate};
use rppg_core::image::FrameImage;
use rppg_core::ingest::{load_frames, load_manifest, load_ppg, SkinTone, VideoRecord};
use rppg_core::maskgen::{
    load_external_mask, load_landmarks, mask_filename, record_mask_dir, save_mask_png,
    skin_threshold_mask, synthesize_mask, FrameLandmarks, WeightMask,
};
use rppg_core::rppg::{extract, load_pulse_csv, save_pulse_csv, Method, PulseSignal};
use rppg_core::stats::mean;
use rppg_core::synth::{write_dataset, SynthSpec};
use rppg_core::trace::{build_trace, load_trace_csv, save_trace_csv, RgbTrace};

use crate::config::{MaskProvider, PipelineConfig};

/// Generate a synthetic dataset directory. `spec_path` may point to a JSON
/// spec; missing fields take their defaults.
pub fn cmd_synth(spec_path: Option<&Path>, out: &Path, seed: u64) -> Result<PathBuf> {
    let spec = match spec_path {
        Some(path) => {
            let text =
                fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))?;
            serde_json::from_str::<SynthSpec>(&text)
                .with_context(|| format!("parsing {}", path.display()))?
        }
        None => SynthSpec::default(),
    };
    fs::create_dir_all(out).with_context(|| format!("creating {}", out.display()))?;
    let manifest = write_dataset(&spec, seed, out)?;
    log::info!("wrote {} frames to {}", spec.frame_count(), out.display());
    Ok(manifest)
}

/// Per-frame masks of one record under the configured provider.
fn record_masks(
    record: &VideoRecord,
    frames: &[FrameImage],
    config: &PipelineConfig,
) -> Result<Vec<WeightMask>> {
    let (width, height) = frames
        .first()
        .map(|f| (f.width, f.height))
        .ok_or_else(|| anyhow!("record {} has no frames", record.id))?;
    let masks = raw_record_masks(record, frames, config, width, height)?;
    if config.binarize_masks {
        return Ok(masks.iter().map(|m| m.binarized()).collect());
    }
    Ok(masks)
}

fn raw_record_masks(
    record: &VideoRecord,
    frames: &[FrameImage],
    config: &PipelineConfig,
    width: u32,
    height: u32,
) -> Result<Vec<WeightMask>> {
    match config.mask_provider {
        MaskProvider::Threshold => frames
            .iter()
            .map(|f| Ok(skin_threshold_mask(f, &config.cbcr)?))
            .collect(),
        MaskProvider::External => {
            let dir = record.external_masks.as_ref().ok_or_else(|| {
                anyhow!(
                    "record {}: external provider needs external_masks",
                    record.id
                )
            })?;
            (0..frames.len())
                .map(|i| Ok(load_external_mask(dir, i)?))
                .collect()
        }
        MaskProvider::Landmarks => {
            let path = record.landmarks.as_ref().ok_or_else(|| {
                anyhow!(
                    "record {}: landmarks provider needs a landmarks file",
                    record.id
                )
            })?;
            let by_index: BTreeMap<usize, FrameLandmarks> = load_landmarks(path)?
                .into_iter()
                .map(|lm| (lm.frame_index, lm))
                .collect();
            let mut missing = 0usize;
            let masks = (0..frames.len())
                .map(|i| match by_index.get(&i) {
                    Some(lm) => Ok(synthesize_mask(lm, width, height)?),
                    None => {
                        missing += 1;
                        Ok(WeightMask::zeros(width, height))
                    }
                })
                .collect::<Result<Vec<_>>>()?;
            if missing > 0 {
                log::warn!(
                    "record {}: {missing} frames have no landmark entry; emitting all-zero masks",
                    record.id
                );
            }
            Ok(masks)
        }
    }
}

/// Write one 16-bit PNG mask archive per record under `out/<record id>/`.
pub fn cmd_mask(manifest_path: &Path, config: &PipelineConfig, out: &Path) -> Result<()> {
    let manifest = load_manifest(manifest_path)?;
    for record in &manifest.records {
        let frames = load_frames(record)?;
        let masks = record_masks(record, &frames, config)?;
        let dir = record_mask_dir(out, &record.id);
        fs::create_dir_all(&dir).with_context(|| format!("creating {}", dir.display()))?;
        for (i, mask) in masks.iter().enumerate() {
            save_mask_png(mask, &dir.join(mask_filename(i)))?;
        }
        log::info!(
            "record {}: {} masks -> {}",
            record.id,
            masks.len(),
            dir.display()
        );
    }
    Ok(())
}

/// Write one trace CSV per record under `out/trace_<record id>.csv`.
pub fn cmd_trace(manifest_path: &Path, config: &PipelineConfig, out: &Path) -> Result<()> {
    let manifest = load_manifest(manifest_path)?;
    fs::create_dir_all(out).with_context(|| format!("creating {}", out.display()))?;
    for record in &manifest.records {
        let frames = load_frames(record)?;
        let masks = record_masks(record, &frames, config)?;
        let trace = build_trace(&frames, &masks, record.fps)?;
        let path = out.join(format!("trace_{}.csv", record.id));
        save_trace_csv(&trace, &path)?;
        log::info!(
            "record {}: trace of {} frames ({} missed) -> {}",
            record.id,
            trace.len(),
            trace.frames_missed,
            path.display()
        );
    }
    Ok(())
}

/// Extract a pulse from a trace CSV.
pub fn cmd_extract(
    trace_path: &Path,
    fps: Option<f64>,
    method: Method,
    config: &PipelineConfig,
    out: &Path,
) -> Result<()> {
    let trace = load_trace_csv(trace_path, fps)?;
    let pulse = extract(method, &trace, &config.extract_opts())?;
    save_pulse_csv(&pulse, out)?;
    Ok(())
}

/// Whole-signal HR plus an HR-over-time series from a pulse CSV.
pub fn cmd_hr(
    pulse_path: &Path,
    fps: Option<f64>,
    config: &PipelineConfig,
    out: &Path,
) -> Result<HrEstimate> {
    let pulse = load_pulse_csv(pulse_path, fps)?;
    let band = config.band.band();
    let est = estimate_hr_samples(&pulse.samples, pulse.fps, band)?;
    let series = hr_over_time(&pulse, config.hr_window_s, config.hr_stride_s, band)?;
    save_hr_series_csv(&series, out)?;
    Ok(est)
}

/// Full run output: one report per method plus the nondeterministic
/// timestamp, isolated in its own key.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct RunReport {
    pub timestamp: String,
    pub reports: Vec<EvalReport>,
}

/// Per-method outcome: `(predicted BPM, SNR)` or the failure message.
type MethodOutcome = std::result::Result<(f64, Option<f64>), String>;

struct RecordRun {
    id: String,
    scenario: rppg_core::Scenario,
    skin_tone: Option<SkinTone>,
    frames_missed: usize,
    gt_bpm: f64,
    per_method: Vec<(Method, MethodOutcome)>,
    seg: Option<SegMetrics>,
}

fn run_record(
    record: &VideoRecord,
    methods: &[Method],
    config: &PipelineConfig,
) -> std::result::Result<RecordRun, RecordError> {
    let fail = |stage: &str, message: String| RecordError {
        id: record.id.clone(),
        stage: stage.to_string(),
        message,
    };

    let frames = load_frames(record).map_err(|e| fail("ingest", e.to_string()))?;
    let masks = record_masks(record, &frames, config).map_err(|e| fail("mask", e.to_string()))?;
    let trace: RgbTrace =
        build_trace(&frames, &masks, record.fps).map_err(|e| fail("trace", e.to_string()))?;

    let gt_ref = record
        .gt
        .first()
        .ok_or_else(|| fail("gt", "record has no ground truth reference".into()))?;
    let gt = load_ppg(gt_ref).map_err(|e| fail("gt", e.to_string()))?;
    let band = config.band.band();
    let gt_bpm = estimate_hr_samples(&gt.samples, gt.rate_hz, band)
        .map_err(|e| fail("gt", e.to_string()))?
        .bpm;

    let opts = config.extract_opts();
    let per_method = methods
        .iter()
        .map(|&method| {
            let outcome = extract(method, &trace, &opts)
                .and_then(|pulse: PulseSignal| {
                    let pred = estimate_hr_samples(&pulse.samples, pulse.fps, band)?;
                    let snr = match eval::snr_db(&pulse, gt_bpm, band, config.snr_template()) {
                        Ok(v) => Some(v),
                        Err(e) => {
                            log::warn!("record {} {method}: SNR unavailable: {e}", record.id);
                            None
                        }
                    };
                    Ok((pred.bpm, snr))
                })
                .map_err(|e| e.to_string());
            (method, outcome)
        })
        .collect();

    // segmentation metrics against a ground-truth mask archive, if provided
    let seg = match &config.gt_mask_dir {
        None => None,
        Some(root) => {
            let dir = if root.join(&record.id).is_dir() {
                root.join(&record.id)
            } else {
                root.clone()
            };
            let mut per_frame = Vec::with_capacity(masks.len());
            for (i, pred) in masks.iter().enumerate() {
                let gt_mask =
                    load_external_mask(&dir, i).map_err(|e| fail("seg", e.to_string()))?;
                per_frame.push(
                    seg_metrics(pred, &gt_mask, DEFAULT_SEG_TOL)
                        .map_err(|e| fail("seg", e.to_string()))?,
                );
            }
            Some(mean_seg(
                &per_frame,
                record.skin_tone.unwrap_or(SkinTone::Nan),
            ))
        }
    };

    Ok(RecordRun {
        id: record.id.clone(),
        scenario: record.scenario,
        skin_tone: record.skin_tone,
        frames_missed: trace.frames_missed,
        gt_bpm,
        per_method,
        seg,
    })
}

fn mean_seg(frames: &[SegMetrics], group: SkinTone) -> SegMetrics {
    let col = |f: fn(&SegMetrics) -> f64| {
        let v: Vec<f64> = frames.iter().map(f).collect();
        mean(&v)
    };
    SegMetrics {
        acc_012: col(|s| s.acc_012),
        f1: col(|s| s.f1),
        iou: col(|s| s.iou),
        ae_std: col(|s| s.ae_std),
        group,
    }
}

/// Group per-record segmentation means by skin tone.
fn group_seg(runs: &[&RecordRun]) -> Vec<SegMetrics> {
    let mut by_group: BTreeMap<SkinTone, Vec<SegMetrics>> = BTreeMap::new();
    for run in runs {
        if let Some(seg) = &run.seg {
            by_group
                .entry(run.skin_tone.unwrap_or(SkinTone::Nan))
                .or_default()
                .push(*seg);
        }
    }
    by_group
        .into_iter()
        .map(|(group, list)| mean_seg(&list, group))
        .collect()
}

/// Run the whole pipeline over a manifest and write `report.json`,
/// `summary.csv`, and one `scatter_<METHOD>.csv` per method into the output
/// directory. Returns the report and the number of failed records.
pub fn cmd_run(manifest_path: &Path, config: &PipelineConfig) -> Result<(RunReport, usize)> {
    let manifest = load_manifest(manifest_path)?;
    let methods = config.method.list();
    let manifest_ids: Vec<String> = manifest.records.iter().map(|r| r.id.clone()).collect();

    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(config.jobs.max(1))
        .build()
        .context("building worker pool")?;
    let outcomes: Vec<std::result::Result<RecordRun, RecordError>> = pool.install(|| {
        manifest
            .records
            .par_iter()
            .map(|record| run_record(record, &methods, config))
            .collect()
    });

    let runs: Vec<&RecordRun> = outcomes.iter().filter_map(|o| o.as_ref().ok()).collect();
    let record_errors: Vec<&RecordError> =
        outcomes.iter().filter_map(|o| o.as_ref().err()).collect();
    let seg = group_seg(&runs);

    let mut reports = Vec::with_capacity(methods.len());
    for &method in &methods {
        let mut evals = Vec::new();
        let mut errors: Vec<RecordError> = record_errors.iter().map(|e| (*e).clone()).collect();
        for run in &runs {
            let outcome = run
                .per_method
                .iter()
                .find(|(m, _)| *m == method)
                .map(|(_, o)| o)
                .expect("every method evaluated per record");
            match outcome {
                Ok((pred_bpm, snr_db)) => evals.push(VideoEval {
                    id: run.id.clone(),
                    scenario: run.scenario,
                    pred_bpm: *pred_bpm,
                    gt_bpm: run.gt_bpm,
                    snr_db: *snr_db,
                    frames_missed: run.frames_missed,
                }),
                Err(message) => errors.push(RecordError {
                    id: run.id.clone(),
                    stage: format!("extract:{method}"),
                    message: message.clone(),
                }),
            }
        }
        let mut echo = config.echo();
        echo["effective_method"] = serde_json::Value::String(method.to_string());
        reports.push(eval::build_report(
            &manifest_ids,
            method.name(),
            &evals,
            errors,
            seg.clone(),
            echo,
        )?);
    }

    let timestamp = std::time::SystemTime::now()
        .duration_since(std::time::UNIX_EPOCH)
        .map(|d| d.as_secs().to_string())
        .unwrap_or_else(|_| "0".into());
    let report = RunReport { timestamp, reports };

    let out = &config.out_dir;
    fs::create_dir_all(out).with_context(|| format!("creating {}", out.display()))?;
    fs::write(
        out.join("report.json"),
        serde_json::to_string_pretty(&report)?,
    )?;
    fs::write(out.join("summary.csv"), summary_csv(&report.reports))?;
    for r in &report.reports {
        fs::write(
            out.join(format!("scatter_{}.csv", r.method)),
            scatter_csv(r),
        )?;
    }

    let failed: usize = report
        .reports
        .iter()
        .flat_map(|r| r.errors.iter())
        .map(|e| e.id.clone())
        .collect::<std::collections::BTreeSet<_>>()
        .len();
    Ok((report, failed))
}

/// Evaluate externally produced per-video HR predictions (`id,pred_bpm`
/// CSV) against a manifest's ground truth.
pub fn cmd_eval(
    manifest_path: &Path,
    pred_path: &Path,
    config: &PipelineConfig,
    out: &Path,
) -> Result<EvalReport> {
    let manifest = load_manifest(manifest_path)?;
    let text = fs::read_to_string(pred_path)
        .with_context(|| format!("reading {}", pred_path.display()))?;
    let mut preds: BTreeMap<String, f64> = BTreeMap::new();
    for (line_no, line) in text.lines().enumerate().skip(1) {
        let line = line.trim();
        if line.is_empty() {
            continue;
        }
        let (id, bpm) = line.split_once(',').ok_or_else(|| {
            anyhow!(
                "{}:{}: expected id,pred_bpm",
                pred_path.display(),
                line_no + 1
            )
        })?;
        preds.insert(
            id.trim().to_string(),
            bpm.trim().parse().map_err(|_| {
                anyhow!(
                    "{}:{}: bad number {bpm:?}",
                    pred_path.display(),
                    line_no + 1
                )
            })?,
        );
    }

    let band = config.band.band();
    let mut evals = Vec::new();
    let mut errors = Vec::new();
    for record in &manifest.records {
        let Some(&pred_bpm) = preds.get(&record.id) else {
            errors.push(RecordError {
                id: record.id.clone(),
                stage: "eval".into(),
                message: "no prediction supplied".into(),
            });
            continue;
        };
        match record
            .gt
            .first()
            .ok_or_else(|| anyhow!("record {} has no ground truth", record.id))
            .and_then(|gt_ref| Ok(load_ppg(gt_ref)?))
            .and_then(|gt| Ok(estimate_hr_samples(&gt.samples, gt.rate_hz, band)?.bpm))
        {
            Ok(gt_bpm) => evals.push(VideoEval {
                id: record.id.clone(),
                scenario: record.scenario,
                pred_bpm,
                gt_bpm,
                snr_db: None,
                frames_missed: 0,
            }),
            Err(e) => errors.push(RecordError {
                id: record.id.clone(),
                stage: "gt".into(),
                message: e.to_string(),
            }),
        }
    }

    let manifest_ids: Vec<String> = manifest.records.iter().map(|r| r.id.clone()).collect();
    let report = eval::build_report(
        &manifest_ids,
        "external",
        &evals,
        errors,
        vec![],
        config.echo(),
    )?;
    fs::create_dir_all(out).with_context(|| format!("creating {}", out.display()))?;
    fs::write(
        out.join("report.json"),
        serde_json::to_string_pretty(&report)?,
    )?;
    fs::write(
        out.join("summary.csv"),
        summary_csv(std::slice::from_ref(&report)),
    )?;
    fs::write(out.join("scatter_external.csv"), scatter_csv(&report))?;
    Ok(report)
}

pub const SEG_CSV_HEADER: &str = "group,n,acc_012,f1,iou,ae_std";

/// Compare two aligned mask archives, optionally grouped by a `frame,group`
/// CSV (skin-tone labels). Writes one row per group plus a pooled `all` row.
pub fn cmd_eval_seg(
    pred_dir: &Path,
    gt_dir: &Path,
    groups_path: Option<&Path>,
    tol: f64,
    out: &Path,
) -> Result<String> {
    let groups: BTreeMap<usize, SkinTone> = match groups_path {
        None => BTreeMap::new(),
        Some(path) => {
            let text =
                fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))?;
            let mut map = BTreeMap::new();
            for (line_no, line) in text.lines().enumerate().skip(1) {
                let line = line.trim();
                if line.is_empty() {
                    continue;
                }
                let (frame, group) = line.split_once(',').ok_or_else(|| {
                    anyhow!("{}:{}: expected frame,group", path.display(), line_no + 1)
                })?;
                map.insert(
                    frame.trim().parse::<usize>().map_err(|_| {
                        anyhow!(
                            "{}:{}: bad frame index {frame:?}",
                            path.display(),
                            line_no + 1
                        )
                    })?,
                    group.trim().parse().map_err(anyhow::Error::msg)?,
                );
            }
            map
        }
    };

    // iterate the ground-truth archive's frames
    let mut indices: Vec<usize> = fs::read_dir(gt_dir)
        .with_context(|| format!("reading {}", gt_dir.display()))?
        .filter_map(|e| e.ok())
        .filter_map(|e| {
            let name = e.file_name();
            let name = name.to_str()?;
            let idx = name.strip_prefix("mask_")?.strip_suffix(".png")?;
            idx.parse::<usize>().ok()
        })
        .collect();
    indices.sort_unstable();
    if indices.is_empty() {
        bail!("no mask_NNNNNN.png files in {}", gt_dir.display());
    }

    let mut by_group: BTreeMap<SkinTone, Vec<SegMetrics>> = BTreeMap::new();
    let mut pooled = Vec::with_capacity(indices.len());
    for &i in &indices {
        let pred = load_external_mask(pred_dir, i)?;
        let gt = load_external_mask(gt_dir, i)?;
        let m = seg_metrics(&pred, &gt, tol)?;
        let group = groups.get(&i).copied().unwrap_or(SkinTone::Nan);
        by_group.entry(group).or_default().push(m);
        pooled.push(m);
    }

    let mut csv = String::from(SEG_CSV_HEADER);
    csv.push('\n');
    let mut push_row = |label: String, list: &[SegMetrics], group: SkinTone| {
        let m = mean_seg(list, group);
        csv.push_str(&format!(
            "{label},{},{:.6},{:.6},{:.6},{:.6}\n",
            list.len(),
            m.acc_012,
            m.f1,
            m.iou,
            m.ae_std
        ));
    };
    for (group, list) in &by_group {
        push_row(group.to_string(), list, *group);
    }
    push_row("all".to_string(), &pooled, SkinTone::Nan);

    fs::write(out, &csv).with_context(|| format!("writing {}", out.display()))?;
    Ok(csv)
}
