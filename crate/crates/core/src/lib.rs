//! Camera-based heart-rate estimation toolkit.
//!
//! The pipeline runs in five stages, each its own module:
//!
//! 1. [`ingest`]: dataset manifests, frame sequences, ground-truth pulse
//!    signals (with dual-sensor fusion and linear resampling).
//! 2. [`maskgen`]: per-frame skin weight masks from landmark regions with
//!    angle-aware priority weighting, Cb-Cr color thresholding, or external
//!    16-bit mask archives.
//! 3. [`trace`]: weighted spatial averaging of each frame into an RGB
//!    trace, tracking frames where the mask failed.
//! 4. [`rppg`] + [`hr`]: pulse extraction (GREEN, CHROM, POS, PBV, LGI,
//!    PCA, OMIT) and spectral heart-rate estimation.
//! 5. [`eval`]: MAE/RMSE/MAPE/PCC/SNR, segmentation quality, frames-missed
//!    statistics, and report assembly.
//!
//! [`synth`] generates fully deterministic synthetic datasets with exactly
//! known heart rate, serving as the ground-truth oracle for all of the
//! above.

pub mod error;
pub mod eval;
pub mod filter;
pub mod hr;
pub mod image;
pub mod ingest;
pub mod linalg;
pub mod maskgen;
pub mod rppg;
pub mod spectrum;
pub mod stats;
pub mod synth;
pub mod trace;

pub use error::{Error, Result};
pub use eval::{EvalReport, HrMetrics, SegMetrics};
pub use hr::{HrEstimate, HrSeries};
pub use image::FrameImage;
pub use ingest::{DatasetManifest, PpgSignal, Scenario, SkinTone, VideoRecord};
pub use maskgen::{CbCrBox, FrameLandmarks, Priority, RegionSpec, WeightMask};
pub use rppg::{BandPassSpec, ExtractOpts, Method, PulseSignal};
pub use synth::{SynthDataset, SynthSpec};
pub use trace::RgbTrace;
