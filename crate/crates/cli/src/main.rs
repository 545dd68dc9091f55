use std::path::PathBuf;
use std::process::ExitCode;

use anyhow::Result;
use clap::{Args, Parser, Subcommand};

use rppg_cli::commands;
use rppg_cli::config::{parse_band, MaskProvider, MethodSel, PipelineConfig};

/// Heart-rate estimation from frame sequences: skin weight masks, pulse
/// extraction, spectral HR, and evaluation. Verbosity via the RPPG_LOG
/// environment variable (error|warn|info|debug|trace).
#[derive(Parser)]
#[command(name = "rppg", version, about)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

/// Options shared by the pipeline stages; values override the config file.
#[derive(Args, Clone, Default)]
struct ConfigArgs {
    /// Configuration file (flat `key = value` lines)
    #[arg(long)]
    config: Option<PathBuf>,
    /// Mask provider: landmarks | threshold | external
    #[arg(long)]
    provider: Option<MaskProvider>,
    /// Extraction method (GREEN|CHROM|POS|PBV|LGI|PCA|OMIT) or `all`
    #[arg(long)]
    method: Option<MethodSel>,
    /// Pass band in Hz as `lo:hi`
    #[arg(long, value_parser = parse_band)]
    band: Option<(f64, f64)>,
    /// Worker threads for per-video parallelism
    #[arg(long)]
    jobs: Option<usize>,
    /// Seed for synthetic data generation
    #[arg(long)]
    seed: Option<u64>,
}

impl ConfigArgs {
    fn resolve(&self) -> Result<PipelineConfig> {
        let mut config = match &self.config {
            Some(path) => PipelineConfig::from_file(path)?,
            None => PipelineConfig::default(),
        };
        if let Some(p) = self.provider {
            config.mask_provider = p;
        }
        if let Some(m) = self.method {
            config.method = m;
        }
        if let Some((lo, hi)) = self.band {
            config.band.lo_hz = lo;
            config.band.hi_hz = hi;
        }
        if let Some(j) = self.jobs {
            config.jobs = j;
        }
        if let Some(s) = self.seed {
            config.seed = s;
        }
        Ok(config)
    }
}

#[derive(Subcommand)]
enum Command {
    /// Generate a synthetic dataset with exactly known heart rate
    Synth {
        /// JSON generator spec; defaults apply for missing fields
        #[arg(long)]
        spec: Option<PathBuf>,
        #[arg(long)]
        out: PathBuf,
        #[command(flatten)]
        common: ConfigArgs,
    },
    /// Produce 16-bit PNG mask archives for every record
    Mask {
        #[arg(long)]
        manifest: PathBuf,
        #[arg(long)]
        out: PathBuf,
        #[command(flatten)]
        common: ConfigArgs,
    },
    /// Reduce each record to a weighted RGB trace CSV
    Trace {
        #[arg(long)]
        manifest: PathBuf,
        #[arg(long)]
        out: PathBuf,
        #[command(flatten)]
        common: ConfigArgs,
    },
    /// Extract a pulse waveform from a trace CSV
    Extract {
        #[arg(long)]
        trace: PathBuf,
        #[arg(long)]
        out: PathBuf,
        /// Frame rate; inferred from the trace timestamps when omitted
        #[arg(long)]
        fps: Option<f64>,
        #[command(flatten)]
        common: ConfigArgs,
    },
    /// Estimate heart rate (whole signal + over time) from a pulse CSV
    Hr {
        #[arg(long)]
        pulse: PathBuf,
        /// Output CSV for the HR-over-time series
        #[arg(long)]
        out: PathBuf,
        #[arg(long)]
        fps: Option<f64>,
        /// Sliding window length in seconds
        #[arg(long)]
        window: Option<f64>,
        /// Window stride in seconds
        #[arg(long)]
        stride: Option<f64>,
        #[command(flatten)]
        common: ConfigArgs,
    },
    /// Score external per-video HR predictions against a manifest
    Eval {
        #[arg(long)]
        manifest: PathBuf,
        /// Predictions CSV with header `id,pred_bpm`
        #[arg(long)]
        pred: PathBuf,
        #[arg(long)]
        out: PathBuf,
        #[command(flatten)]
        common: ConfigArgs,
    },
    /// Compare two mask archives, grouped by skin tone
    EvalSeg {
        #[arg(long)]
        pred: PathBuf,
        #[arg(long)]
        gt: PathBuf,
        /// Optional `frame,group` CSV with skin-tone labels
        #[arg(long)]
        groups: Option<PathBuf>,
        /// Weight-error tolerance for the accuracy metric
        #[arg(long, default_value_t = 0.12)]
        tol: f64,
        #[arg(long)]
        out: PathBuf,
    },
    /// Run the full pipeline over a manifest and write reports
    Run {
        #[arg(long)]
        manifest: PathBuf,
        /// Output directory (overrides the config file)
        #[arg(long)]
        out: Option<PathBuf>,
        #[command(flatten)]
        common: ConfigArgs,
    },
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::new().filter_or("RPPG_LOG", "warn")).init();
    match run() {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::FAILURE
        }
    }
}

fn run() -> Result<ExitCode> {
    let cli = Cli::parse();
    match cli.command {
        Command::Synth { spec, out, common } => {
            let config = common.resolve()?;
            let manifest = commands::cmd_synth(spec.as_deref(), &out, config.seed)?;
            println!("{}", manifest.display());
        }
        Command::Mask {
            manifest,
            out,
            common,
        } => {
            commands::cmd_mask(&manifest, &common.resolve()?, &out)?;
        }
        Command::Trace {
            manifest,
            out,
            common,
        } => {
            commands::cmd_trace(&manifest, &common.resolve()?, &out)?;
        }
        Command::Extract {
            trace,
            out,
            fps,
            common,
        } => {
            let config = common.resolve()?;
            let method = match config.method {
                MethodSel::One(m) => m,
                MethodSel::All => anyhow::bail!(
                    "extract writes one pulse CSV; pick a single method (GREEN|CHROM|POS|PBV|LGI|PCA|OMIT)"
                ),
            };
            commands::cmd_extract(&trace, fps, method, &config, &out)?;
        }
        Command::Hr {
            pulse,
            out,
            fps,
            window,
            stride,
            common,
        } => {
            let mut config = common.resolve()?;
            if let Some(w) = window {
                config.hr_window_s = w;
            }
            if let Some(s) = stride {
                config.hr_stride_s = s;
            }
            let est = commands::cmd_hr(&pulse, fps, &config, &out)?;
            println!("{:.2}", est.bpm);
        }
        Command::Eval {
            manifest,
            pred,
            out,
            common,
        } => {
            let report = commands::cmd_eval(&manifest, &pred, &common.resolve()?, &out)?;
            if !report.errors.is_empty() {
                for e in &report.errors {
                    eprintln!("record {} failed at {}: {}", e.id, e.stage, e.message);
                }
                return Ok(ExitCode::FAILURE);
            }
        }
        Command::EvalSeg {
            pred,
            gt,
            groups,
            tol,
            out,
        } => {
            let csv = commands::cmd_eval_seg(&pred, &gt, groups.as_deref(), tol, &out)?;
            print!("{csv}");
        }
        Command::Run {
            manifest,
            out,
            common,
        } => {
            let mut config = common.resolve()?;
            if let Some(out) = out {
                config.out_dir = out;
            }
            let (report, failed) = commands::cmd_run(&manifest, &config)?;
            for r in &report.reports {
                for e in &r.errors {
                    eprintln!(
                        "[{}] record {} failed at {}: {}",
                        r.method, e.id, e.stage, e.message
                    );
                }
            }
            println!(
                "wrote {} report(s) to {}",
                report.reports.len(),
                config.out_dir.display()
            );
            if failed > 0 {
                eprintln!("{failed} record(s) failed");
                return Ok(ExitCode::FAILURE);
            }
        }
    }
    Ok(ExitCode::SUCCESS)
}
