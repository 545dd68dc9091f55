//! Evaluation metrics and report assembly: HR accuracy (MAE/RMSE/MAPE/PCC),
//! template SNR, segmentation quality, frames-missed statistics, and the
//! per-scenario aggregate report.

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::ingest::{Scenario, SkinTone};
use crate::maskgen::WeightMask;
use crate::rppg::PulseSignal;
use crate::spectrum::{default_nfft, periodogram_hann};
use crate::stats::{mean, sem};

/// Heart-rate accuracy over a group of videos. `pcc` is `None` when either
/// input has zero variance (correlation undefined, not zero). Every metric
/// carries the standard error of its mean estimate.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct HrMetrics {
    pub mae: f64,
    pub rmse: f64,
    pub mape: f64,
    pub pcc: Option<f64>,
    pub snr_db: Option<f64>,
    pub n: usize,
    pub mae_se: f64,
    pub rmse_se: f64,
    pub mape_se: f64,
    pub pcc_se: Option<f64>,
    pub snr_db_se: Option<f64>,
}

/// MAE, RMSE, MAPE, and Pearson correlation between predicted and
/// ground-truth BPM arrays. SNR fields are left empty; callers aggregate
/// per-video SNR separately.
pub fn hr_metrics(pred: &[f64], gt: &[f64]) -> Result<HrMetrics> {
    if pred.len() != gt.len() {
        return Err(Error::LengthMismatch(pred.len(), gt.len()));
    }
    if pred.is_empty() {
        return Err(Error::EmptySignal);
    }
    if let Some(&bad) = gt.iter().find(|&&g| g <= 0.0) {
        return Err(Error::NonPositiveGroundTruth(bad));
    }
    let n = pred.len();

    let abs_err: Vec<f64> = pred.iter().zip(gt).map(|(p, g)| (p - g).abs()).collect();
    let sq_err: Vec<f64> = abs_err.iter().map(|e| e * e).collect();
    let pct_err: Vec<f64> = abs_err.iter().zip(gt).map(|(e, g)| 100.0 * e / g).collect();

    let mae = mean(&abs_err);
    let rmse = mean(&sq_err).sqrt();
    let mape = mean(&pct_err);

    // Delta method for the RMSE standard error: se(sqrt(M)) ~ se(M) / (2 sqrt(M)).
    let rmse_se = if rmse > 0.0 {
        sem(&sq_err) / (2.0 * rmse)
    } else {
        0.0
    };

    let pcc = pearson(pred, gt);
    let pcc_se = pcc.and_then(|r| {
        if n > 2 {
            Some(((1.0 - r * r) / (n - 2) as f64).sqrt())
        } else {
            None
        }
    });

    Ok(HrMetrics {
        mae,
        rmse,
        mape,
        pcc,
        snr_db: None,
        n,
        mae_se: sem(&abs_err),
        rmse_se,
        mape_se: sem(&pct_err),
        pcc_se,
        snr_db_se: None,
    })
}

/// Pearson correlation; `None` when either argument has zero variance.
pub fn pearson(x: &[f64], y: &[f64]) -> Option<f64> {
    if x.len() != y.len() || x.len() < 2 {
        return None;
    }
    let (mx, my) = (mean(x), mean(y));
    let mut sxy = 0.0;
    let mut sxx = 0.0;
    let mut syy = 0.0;
    for (a, b) in x.iter().zip(y) {
        let (dx, dy) = (a - mx, b - my);
        sxy += dx * dy;
        sxx += dx * dx;
        syy += dy * dy;
    }
    if sxx == 0.0 || syy == 0.0 {
        return None;
    }
    Some(sxy / (sxx * syy).sqrt())
}

/// Spectral template windows around the HR fundamental and first harmonic.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SnrTemplate {
    pub fund_halfwidth_hz: f64,
    pub harm_halfwidth_hz: f64,
}

impl Default for SnrTemplate {
    fn default() -> Self {
        SnrTemplate {
            fund_halfwidth_hz: 0.1,
            harm_halfwidth_hz: 0.2,
        }
    }
}

/// Template SNR in dB: periodogram power inside the fundamental and harmonic
/// windows (clipped to the band) over the remaining in-band power.
pub fn snr_db(
    pulse: &PulseSignal,
    gt_hr_bpm: f64,
    band: (f64, f64),
    template: SnrTemplate,
) -> Result<f64> {
    let f_hr = gt_hr_bpm / 60.0;
    let (lo, hi_requested) = band;
    let nyquist = pulse.fps / 2.0;
    let hi = hi_requested.min(nyquist);
    if !(f_hr >= lo && f_hr <= hi) {
        return Err(Error::Validation(format!(
            "ground-truth HR {gt_hr_bpm} BPM lies outside the band [{lo}, {hi}] Hz"
        )));
    }

    let spec = periodogram_hann(
        &pulse.samples,
        pulse.fps,
        default_nfft(pulse.fps, pulse.samples.len()),
    );
    let mut signal = 0.0;
    let mut noise = 0.0;
    let mut noise_bins = 0usize;
    for k in spec.band_indices(lo, hi) {
        let f = spec.freqs[k];
        let in_fund = (f - f_hr).abs() <= template.fund_halfwidth_hz;
        let in_harm = (f - 2.0 * f_hr).abs() <= template.harm_halfwidth_hz;
        if in_fund || in_harm {
            signal += spec.power[k];
        } else {
            noise += spec.power[k];
            noise_bins += 1;
        }
    }
    if noise_bins == 0 {
        return Err(Error::EmptyNoiseRegion);
    }
    // floor the ratio to keep the result finite for silent signals
    let ratio = signal.max(1e-300) / noise.max(1e-300);
    Ok(10.0 * ratio.log10())
}

/// Segmentation quality of one predicted mask against ground truth.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SegMetrics {
    /// Fraction of pixels whose absolute weight error is within tolerance.
    pub acc_012: f64,
    /// F1 of the binarized (weight > 0) skin areas.
    pub f1: f64,
    /// IoU of the binarized skin areas.
    pub iou: f64,
    /// Standard deviation of the absolute weight error.
    pub ae_std: f64,
    pub group: SkinTone,
}

pub const DEFAULT_SEG_TOL: f64 = 0.12;

pub fn seg_metrics(pred: &WeightMask, gt: &WeightMask, tol: f64) -> Result<SegMetrics> {
    if !(pred.width == gt.width && pred.height == gt.height) {
        return Err(Error::DimensionMismatch(format!(
            "pred {}x{} vs gt {}x{}",
            pred.width, pred.height, gt.width, gt.height
        )));
    }
    let n = pred.weights.len();
    if n == 0 {
        return Err(Error::EmptySignal);
    }

    let mut within = 0usize;
    let mut tp = 0usize;
    let mut fp = 0usize;
    let mut fn_ = 0usize;
    let mut err_sum = 0.0;
    for (p, g) in pred.weights.iter().zip(gt.weights.iter()) {
        let e = (p - g).abs();
        if e <= tol {
            within += 1;
        }
        err_sum += e;
        match (*p > 0.0, *g > 0.0) {
            (true, true) => tp += 1,
            (true, false) => fp += 1,
            (false, true) => fn_ += 1,
            (false, false) => {}
        }
    }
    let acc = within as f64 / n as f64;
    let err_mean = err_sum / n as f64;
    // second pass for the spread; the one-pass formula cancels badly when
    // the error is near-constant
    let var = pred
        .weights
        .iter()
        .zip(gt.weights.iter())
        .map(|(p, g)| {
            let d = (p - g).abs() - err_mean;
            d * d
        })
        .sum::<f64>()
        / n as f64;
    let ae_std = var.sqrt();
    // empty-vs-empty skin areas agree perfectly
    let f1 = if 2 * tp + fp + fn_ == 0 {
        1.0
    } else {
        2.0 * tp as f64 / (2 * tp + fp + fn_) as f64
    };
    let iou = if tp + fp + fn_ == 0 {
        1.0
    } else {
        tp as f64 / (tp + fp + fn_) as f64
    };
    Ok(SegMetrics {
        acc_012: acc,
        f1,
        iou,
        ae_std,
        group: SkinTone::Nan,
    })
}

/// Mean frames-missed per scenario.
pub fn frames_missed_stats(records: &[(Scenario, usize)]) -> BTreeMap<Scenario, f64> {
    let mut sums: BTreeMap<Scenario, (f64, usize)> = BTreeMap::new();
    for (scenario, missed) in records {
        let e = sums.entry(*scenario).or_insert((0.0, 0));
        e.0 += *missed as f64;
        e.1 += 1;
    }
    sums.into_iter()
        .map(|(s, (sum, count))| (s, sum / count as f64))
        .collect()
}

/// One successfully evaluated video.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct VideoEval {
    pub id: String,
    pub scenario: Scenario,
    pub pred_bpm: f64,
    pub gt_bpm: f64,
    pub snr_db: Option<f64>,
    pub frames_missed: usize,
}

/// Per-video entry of the report, keyed by record id.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct VideoResult {
    pub scenario: Scenario,
    pub pred_bpm: f64,
    pub gt_bpm: f64,
    pub snr_db: Option<f64>,
    pub frames_missed: usize,
}

/// A record that failed somewhere in the pipeline; never silently dropped.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RecordError {
    pub id: String,
    pub stage: String,
    pub message: String,
}

/// Full evaluation of one extraction method over a manifest.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EvalReport {
    pub method: String,
    pub per_video: BTreeMap<String, VideoResult>,
    pub per_scenario: BTreeMap<Scenario, HrMetrics>,
    pub frames_missed_per_scenario: BTreeMap<Scenario, f64>,
    pub seg: Vec<SegMetrics>,
    pub errors: Vec<RecordError>,
    pub config_echo: serde_json::Value,
}

impl EvalReport {
    /// `(id, gt_bpm, pred_bpm)` pairs for scatter plots.
    pub fn scatter(&self) -> Vec<(String, f64, f64)> {
        self.per_video
            .iter()
            .map(|(id, v)| (id.clone(), v.gt_bpm, v.pred_bpm))
            .collect()
    }
}

/// Aggregate per-video results into a report. `manifest_ids` is the complete
/// id set; every id must land in exactly one of `evals` or `errors`.
pub fn build_report(
    manifest_ids: &[String],
    method: &str,
    evals: &[VideoEval],
    errors: Vec<RecordError>,
    seg: Vec<SegMetrics>,
    config_echo: serde_json::Value,
) -> Result<EvalReport> {
    let mut covered: BTreeMap<&str, usize> = BTreeMap::new();
    for e in evals {
        *covered.entry(e.id.as_str()).or_default() += 1;
    }
    for e in &errors {
        *covered.entry(e.id.as_str()).or_default() += 1;
    }
    for id in manifest_ids {
        match covered.get(id.as_str()) {
            Some(1) => {}
            Some(k) => {
                return Err(Error::Validation(format!(
                    "record {id:?} appears {k} times in results"
                )))
            }
            None => return Err(Error::MissingResult(id.clone())),
        }
    }

    let mut per_video = BTreeMap::new();
    let mut by_scenario: BTreeMap<Scenario, Vec<&VideoEval>> = BTreeMap::new();
    for e in evals {
        per_video.insert(
            e.id.clone(),
            VideoResult {
                scenario: e.scenario,
                pred_bpm: e.pred_bpm,
                gt_bpm: e.gt_bpm,
                snr_db: e.snr_db,
                frames_missed: e.frames_missed,
            },
        );
        by_scenario.entry(e.scenario).or_default().push(e);
    }

    let mut per_scenario = BTreeMap::new();
    for (scenario, group) in &by_scenario {
        let pred: Vec<f64> = group.iter().map(|e| e.pred_bpm).collect();
        let gt: Vec<f64> = group.iter().map(|e| e.gt_bpm).collect();
        let mut metrics = hr_metrics(&pred, &gt)?;
        let snrs: Vec<f64> = group.iter().filter_map(|e| e.snr_db).collect();
        if !snrs.is_empty() {
            metrics.snr_db = Some(mean(&snrs));
            metrics.snr_db_se = Some(sem(&snrs));
        }
        per_scenario.insert(*scenario, metrics);
    }

    let missed_input: Vec<(Scenario, usize)> = evals
        .iter()
        .map(|e| (e.scenario, e.frames_missed))
        .collect();

    Ok(EvalReport {
        method: method.to_string(),
        per_video,
        per_scenario,
        frames_missed_per_scenario: frames_missed_stats(&missed_input),
        seg,
        errors,
        config_echo,
    })
}

pub const SUMMARY_CSV_HEADER: &str = "scenario,method,n,mae,mae_se,rmse,rmse_se,mape,mape_se,pcc,pcc_se,snr_db,snr_db_se,frames_missed_mean";

fn fmt_opt(v: Option<f64>) -> String {
    match v {
        Some(x) => format!("{x:.4}"),
        None => "undefined".to_string(),
    }
}

/// Toolbox-style summary table: one row per scenario and method.
pub fn summary_csv(reports: &[EvalReport]) -> String {
    let mut out = String::from(SUMMARY_CSV_HEADER);
    out.push('\n');
    for report in reports {
        for (scenario, m) in &report.per_scenario {
            let missed = report
                .frames_missed_per_scenario
                .get(scenario)
                .copied()
                .unwrap_or(0.0);
            out.push_str(&format!(
                "{},{},{},{:.4},{:.4},{:.4},{:.4},{:.4},{:.4},{},{},{},{},{:.4}\n",
                scenario,
                report.method,
                m.n,
                m.mae,
                m.mae_se,
                m.rmse,
                m.rmse_se,
                m.mape,
                m.mape_se,
                fmt_opt(m.pcc),
                fmt_opt(m.pcc_se),
                fmt_opt(m.snr_db),
                fmt_opt(m.snr_db_se),
                missed,
            ));
        }
    }
    out
}

/// Scatter CSV with header `id,gt_bpm,pred_bpm`.
pub fn scatter_csv(report: &EvalReport) -> String {
    let mut out = String::from("id,gt_bpm,pred_bpm\n");
    for (id, gt, pred) in report.scatter() {
        out.push_str(&format!("{id},{gt:.4},{pred:.4}\n"));
    }
    out
}
