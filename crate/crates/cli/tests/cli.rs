//! Integration tests driving the compiled `rppg` binary end to end over a
//! synthetic dataset, plus command-level checks that don't need a process.

use std::fs;
use std::process::Command;

use rppg_cli::commands::{cmd_eval_seg, cmd_mask, cmd_synth, SEG_CSV_HEADER};
use rppg_cli::config::{MaskProvider, PipelineConfig};
use rppg_core::eval::{seg_metrics, DEFAULT_SEG_TOL};
use rppg_core::maskgen::{load_external_mask, mask_filename, save_mask_png, WeightMask};
use rppg_core::synth;

fn rppg() -> Command {
    Command::new(env!("CARGO_BIN_EXE_rppg"))
}

fn small_spec_json() -> String {
    serde_json::json!({
        "duration_s": 8.0,
        "width": 32,
        "height": 24
    })
    .to_string()
}

#[test]
fn binary_pipeline_synth_to_report() {
    let dir = tempfile::tempdir().unwrap();
    let spec_path = dir.path().join("spec.json");
    fs::write(&spec_path, small_spec_json()).unwrap();
    let data_dir = dir.path().join("data");

    // synth
    let out = rppg()
        .args(["synth", "--spec"])
        .arg(&spec_path)
        .arg("--out")
        .arg(&data_dir)
        .args(["--seed", "3"])
        .output()
        .unwrap();
    assert!(
        out.status.success(),
        "synth failed: {}",
        String::from_utf8_lossy(&out.stderr)
    );
    let manifest = data_dir.join("manifest.json");
    assert!(manifest.is_file());
    assert_eq!(fs::read_dir(data_dir.join("frames")).unwrap().count(), 240);

    // mask (threshold provider)
    let mask_dir = dir.path().join("masks");
    let out = rppg()
        .args(["mask", "--manifest"])
        .arg(&manifest)
        .arg("--out")
        .arg(&mask_dir)
        .args(["--provider", "threshold"])
        .output()
        .unwrap();
    assert!(
        out.status.success(),
        "mask failed: {}",
        String::from_utf8_lossy(&out.stderr)
    );
    assert!(mask_dir.join("synth").join(mask_filename(0)).is_file());

    // trace
    let trace_dir = dir.path().join("traces");
    let out = rppg()
        .args(["trace", "--manifest"])
        .arg(&manifest)
        .arg("--out")
        .arg(&trace_dir)
        .args(["--provider", "threshold"])
        .output()
        .unwrap();
    assert!(
        out.status.success(),
        "trace failed: {}",
        String::from_utf8_lossy(&out.stderr)
    );
    let trace_csv = trace_dir.join("trace_synth.csv");
    assert!(trace_csv.is_file());

    // extract
    let pulse_csv = dir.path().join("pulse.csv");
    let out = rppg()
        .args(["extract", "--trace"])
        .arg(&trace_csv)
        .arg("--out")
        .arg(&pulse_csv)
        .args(["--method", "POS", "--fps", "30"])
        .output()
        .unwrap();
    assert!(
        out.status.success(),
        "extract failed: {}",
        String::from_utf8_lossy(&out.stderr)
    );

    // hr: stdout carries the whole-video estimate
    let hr_csv = dir.path().join("hr.csv");
    let out = rppg()
        .args(["hr", "--pulse"])
        .arg(&pulse_csv)
        .arg("--out")
        .arg(&hr_csv)
        .args(["--fps", "30", "--window", "5", "--stride", "1"])
        .output()
        .unwrap();
    assert!(
        out.status.success(),
        "hr failed: {}",
        String::from_utf8_lossy(&out.stderr)
    );
    let bpm: f64 = String::from_utf8_lossy(&out.stdout).trim().parse().unwrap();
    assert!((bpm - 72.0).abs() <= 1.5, "binary pipeline estimated {bpm}");
    assert!(fs::read_to_string(&hr_csv).unwrap().starts_with("t,bpm\n"));

    // run with an explicit band and single method
    let report_dir = dir.path().join("report");
    let out = rppg()
        .args(["run", "--manifest"])
        .arg(&manifest)
        .arg("--out")
        .arg(&report_dir)
        .args([
            "--provider",
            "threshold",
            "--method",
            "POS",
            "--band",
            "0.65:3.3",
            "--jobs",
            "2",
        ])
        .output()
        .unwrap();
    assert!(
        out.status.success(),
        "run failed: {}",
        String::from_utf8_lossy(&out.stderr)
    );
    assert!(report_dir.join("report.json").is_file());
    let summary = fs::read_to_string(report_dir.join("summary.csv")).unwrap();
    assert_eq!(summary.lines().count(), 2, "header plus one scenario row");

    // eval: score the run's own predictions externally
    let scatter = fs::read_to_string(report_dir.join("scatter_POS.csv")).unwrap();
    let pred_csv = dir.path().join("pred.csv");
    let mut pred = String::from("id,pred_bpm\n");
    for line in scatter.lines().skip(1) {
        let fields: Vec<&str> = line.split(',').collect();
        pred.push_str(&format!("{},{}\n", fields[0], fields[2]));
    }
    fs::write(&pred_csv, pred).unwrap();
    let eval_dir = dir.path().join("eval");
    let out = rppg()
        .args(["eval", "--manifest"])
        .arg(&manifest)
        .arg("--pred")
        .arg(&pred_csv)
        .arg("--out")
        .arg(&eval_dir)
        .output()
        .unwrap();
    assert!(
        out.status.success(),
        "eval failed: {}",
        String::from_utf8_lossy(&out.stderr)
    );
    let report: serde_json::Value =
        serde_json::from_str(&fs::read_to_string(eval_dir.join("report.json")).unwrap()).unwrap();
    // predictions passed back through the 4-decimal scatter CSV
    let mae = report["per_scenario"]["rest"]["mae"].as_f64().unwrap();
    assert!(
        mae < 0.01,
        "round-tripped predictions should score near zero, got {mae}"
    );

    // eval-seg: threshold masks against the ground-truth archive
    let seg_csv = dir.path().join("seg.csv");
    let out = rppg()
        .args(["eval-seg", "--pred"])
        .arg(mask_dir.join("synth"))
        .arg("--gt")
        .arg(data_dir.join("gt_masks"))
        .arg("--out")
        .arg(&seg_csv)
        .output()
        .unwrap();
    assert!(
        out.status.success(),
        "eval-seg failed: {}",
        String::from_utf8_lossy(&out.stderr)
    );
    let text = fs::read_to_string(&seg_csv).unwrap();
    assert!(text.starts_with(SEG_CSV_HEADER));
    let all_row = text.lines().last().unwrap();
    let iou: f64 = all_row.split(',').nth(4).unwrap().parse().unwrap();
    assert!(iou >= 0.99, "threshold masks vs gt binarization IoU {iou}");
}

#[test]
fn run_exits_nonzero_when_a_record_fails() {
    let dir = tempfile::tempdir().unwrap();
    let spec_path = dir.path().join("spec.json");
    fs::write(&spec_path, small_spec_json()).unwrap();
    let data_dir = dir.path().join("data");
    cmd_synth(Some(&spec_path), &data_dir, 1).unwrap();
    fs::write(data_dir.join("gt.csv"), "t,value\n").unwrap(); // empty the gt

    let out = rppg()
        .args(["run", "--manifest"])
        .arg(data_dir.join("manifest.json"))
        .arg("--out")
        .arg(dir.path().join("out"))
        .args(["--method", "POS"])
        .output()
        .unwrap();
    assert!(!out.status.success(), "run must fail when a record fails");
    let stderr = String::from_utf8_lossy(&out.stderr);
    assert!(
        stderr.contains("synth"),
        "stderr names the failed record: {stderr}"
    );
}

#[test]
fn mask_external_provider_roundtrips_identically() {
    let dir = tempfile::tempdir().unwrap();
    let spec_path = dir.path().join("spec.json");
    fs::write(&spec_path, small_spec_json()).unwrap();
    let data_dir = dir.path().join("data");
    cmd_synth(Some(&spec_path), &data_dir, 8).unwrap();

    let config = PipelineConfig {
        mask_provider: MaskProvider::External,
        ..PipelineConfig::default()
    };
    let out = dir.path().join("copied");
    cmd_mask(&data_dir.join("manifest.json"), &config, &out).unwrap();
    for i in [0usize, 100, 239] {
        let original = fs::read(data_dir.join("gt_masks").join(mask_filename(i))).unwrap();
        let copied = fs::read(out.join("synth").join(mask_filename(i))).unwrap();
        assert_eq!(
            original, copied,
            "mask {i} not byte-identical after round trip"
        );
    }
}

#[test]
fn mask_landmarks_provider_handles_empty_landmark_files() {
    let dir = tempfile::tempdir().unwrap();
    let spec_path = dir.path().join("spec.json");
    fs::write(&spec_path, small_spec_json()).unwrap();
    let data_dir = dir.path().join("data");
    cmd_synth(Some(&spec_path), &data_dir, 2).unwrap();
    fs::write(data_dir.join("landmarks.json"), "[]").unwrap();

    let config = PipelineConfig {
        mask_provider: MaskProvider::Landmarks,
        ..PipelineConfig::default()
    };
    let out = dir.path().join("masks");
    cmd_mask(&data_dir.join("manifest.json"), &config, &out).unwrap();
    let mask = load_external_mask(&out.join("synth"), 0).unwrap();
    assert_eq!(
        mask.total_weight(),
        0.0,
        "no landmarks means all-zero masks"
    );
}

#[test]
fn eval_seg_grouped_means_match_pooled_recomputation() {
    let dir = tempfile::tempdir().unwrap();
    let pred_dir = dir.path().join("pred");
    let gt_dir = dir.path().join("gt");
    fs::create_dir_all(&pred_dir).unwrap();
    fs::create_dir_all(&gt_dir).unwrap();

    // six frame pairs in two groups with different error levels
    let mut rng = synth::Lcg64::new(31);
    let mut groups_csv = String::from("frame,group\n");
    let mut per_frame = Vec::new();
    for i in 0..6usize {
        let gt = WeightMask {
            width: 8,
            height: 8,
            weights: (0..64).map(|_| rng.uniform()).collect(),
        };
        let shift = if i % 2 == 0 { 0.05 } else { 0.3 };
        let pred = WeightMask {
            width: 8,
            height: 8,
            weights: gt.weights.iter().map(|w| (w + shift).min(1.0)).collect(),
        };
        save_mask_png(&gt, &gt_dir.join(mask_filename(i))).unwrap();
        save_mask_png(&pred, &pred_dir.join(mask_filename(i))).unwrap();
        groups_csv.push_str(&format!(
            "{i},{}\n",
            if i % 2 == 0 { "light" } else { "dark" }
        ));
        // recompute from the quantized PNGs, exactly as the command sees them
        let gt_q = load_external_mask(&gt_dir, i).unwrap();
        let pred_q = load_external_mask(&pred_dir, i).unwrap();
        per_frame.push(seg_metrics(&pred_q, &gt_q, DEFAULT_SEG_TOL).unwrap());
    }
    let groups_path = dir.path().join("groups.csv");
    fs::write(&groups_path, groups_csv).unwrap();

    let out = dir.path().join("seg.csv");
    let csv = cmd_eval_seg(
        &pred_dir,
        &gt_dir,
        Some(&groups_path),
        DEFAULT_SEG_TOL,
        &out,
    )
    .unwrap();

    // brute-force regroup oracle: count-weighted group means must equal the
    // pooled mean
    let parse_row = |label: &str| -> (usize, Vec<f64>) {
        let row = csv
            .lines()
            .find(|l| l.starts_with(&format!("{label},")))
            .unwrap_or_else(|| panic!("row {label} missing in {csv}"));
        let fields: Vec<&str> = row.split(',').collect();
        let n = fields[1].parse().unwrap();
        (n, fields[2..].iter().map(|f| f.parse().unwrap()).collect())
    };
    let (n_light, light) = parse_row("light");
    let (n_dark, dark) = parse_row("dark");
    let (n_all, all) = parse_row("all");
    assert_eq!(n_light + n_dark, n_all);
    for k in 0..4 {
        let pooled = (light[k] * n_light as f64 + dark[k] * n_dark as f64) / n_all as f64;
        assert!(
            (pooled - all[k]).abs() < 1e-4,
            "column {k}: grouped {pooled} vs pooled {}",
            all[k]
        );
        // and the pooled row matches a direct per-frame recomputation
        let direct = per_frame
            .iter()
            .map(|m| [m.acc_012, m.f1, m.iou, m.ae_std][k])
            .sum::<f64>()
            / per_frame.len() as f64;
        assert!(
            (direct - all[k]).abs() < 1e-4,
            "column {k} direct {direct} vs {}",
            all[k]
        );
    }
    // the deliberately larger error in the dark group shows up in acc
    assert!(light[0] > dark[0]);
}

#[test]
fn run_reports_scheduled_occlusions_and_seg_metrics() {
    let dir = tempfile::tempdir().unwrap();
    let spec = serde_json::json!({
        "duration_s": 8.0,
        "width": 32,
        "height": 24,
        "skin_tone": "light",
        "occlusion_schedule": [[40, 46], [100, 102]]
    });
    let spec_path = dir.path().join("spec.json");
    fs::write(&spec_path, spec.to_string()).unwrap();
    let data_dir = dir.path().join("data");
    cmd_synth(Some(&spec_path), &data_dir, 6).unwrap();

    let config = PipelineConfig {
        mask_provider: MaskProvider::Threshold,
        method: rppg_cli::config::MethodSel::One(rppg_core::rppg::Method::Pos),
        gt_mask_dir: Some(data_dir.join("gt_masks")),
        out_dir: dir.path().join("out"),
        ..PipelineConfig::default()
    };
    let (report, failed) =
        rppg_cli::commands::cmd_run(&data_dir.join("manifest.json"), &config).unwrap();
    assert_eq!(failed, 0);
    let r = &report.reports[0];
    assert_eq!(
        r.per_video["synth"].frames_missed, 10,
        "7 + 3 scheduled occlusions"
    );
    assert!((r.per_video["synth"].pred_bpm - 72.0).abs() <= 2.0);

    // segmentation metrics grouped by the record's skin tone annotation
    assert_eq!(r.seg.len(), 1);
    assert_eq!(r.seg[0].group, rppg_core::SkinTone::Light);
    assert!(r.seg[0].iou >= 0.95, "threshold vs gt IoU {}", r.seg[0].iou);

    // effective configuration is echoed into the report
    assert_eq!(r.config_echo["mask_provider"], "threshold");
    assert_eq!(r.config_echo["band"]["lo_hz"], 0.65);
}

#[test]
fn binarized_masks_still_recover_hr() {
    let dir = tempfile::tempdir().unwrap();
    let spec_path = dir.path().join("spec.json");
    fs::write(&spec_path, small_spec_json()).unwrap();
    let data_dir = dir.path().join("data");
    cmd_synth(Some(&spec_path), &data_dir, 12).unwrap();

    // non-weighted ablation over the landmark provider
    let config = PipelineConfig {
        mask_provider: MaskProvider::Landmarks,
        method: rppg_cli::config::MethodSel::One(rppg_core::rppg::Method::Pos),
        binarize_masks: true,
        out_dir: dir.path().join("out"),
        ..PipelineConfig::default()
    };
    let (report, failed) =
        rppg_cli::commands::cmd_run(&data_dir.join("manifest.json"), &config).unwrap();
    assert_eq!(failed, 0);
    let r = &report.reports[0];
    assert!((r.per_video["synth"].pred_bpm - 72.0).abs() <= 1.5);
    assert_eq!(r.config_echo["binarize_masks"], true);
}
