//! Pipeline configuration: a flat `key = value` file (with `#` comments)
//! plus command-line overrides. The effective configuration is echoed
//! verbatim into every report for reproducibility.

use std::fs;
use std::path::{Path, PathBuf};
use std::str::FromStr;

use anyhow::{anyhow, bail, Context, Result};
use serde::{Deserialize, Serialize};

use rppg_core::maskgen::CbCrBox;
use rppg_core::rppg::{BandPassSpec, ExtractOpts, Method};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum MaskProvider {
    Landmarks,
    Threshold,
    External,
}

impl FromStr for MaskProvider {
    type Err = anyhow::Error;
    fn from_str(s: &str) -> Result<Self> {
        match s.trim().to_ascii_lowercase().as_str() {
            "landmarks" => Ok(MaskProvider::Landmarks),
            "threshold" => Ok(MaskProvider::Threshold),
            "external" => Ok(MaskProvider::External),
            other => bail!("unknown mask provider {other:?} (landmarks|threshold|external)"),
        }
    }
}

/// One extraction method or all of them.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum MethodSel {
    One(Method),
    All,
}

impl MethodSel {
    pub fn list(&self) -> Vec<Method> {
        match self {
            MethodSel::One(m) => vec![*m],
            MethodSel::All => Method::ALL.to_vec(),
        }
    }
}

impl FromStr for MethodSel {
    type Err = anyhow::Error;
    fn from_str(s: &str) -> Result<Self> {
        if s.trim().eq_ignore_ascii_case("all") {
            return Ok(MethodSel::All);
        }
        Ok(MethodSel::One(
            s.parse::<Method>().map_err(|e| anyhow!("{e}"))?,
        ))
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PipelineConfig {
    pub mask_provider: MaskProvider,
    pub method: MethodSel,
    pub band: BandPassSpec,
    pub detrend_window_s: f64,
    pub pos_window_s: f64,
    pub hr_window_s: f64,
    pub hr_stride_s: f64,
    pub snr_fund_halfwidth_hz: f64,
    pub snr_harm_halfwidth_hz: f64,
    pub cbcr: CbCrBox,
    /// Binarize provider masks (weight > 0 becomes 1): the non-weighted
    /// "full-body" ablation.
    pub binarize_masks: bool,
    /// Root of per-record ground-truth mask archives (`<dir>/<record id>` or
    /// the record's own `external_masks` directory when it matches); enables
    /// segmentation metrics in `run` reports.
    pub gt_mask_dir: Option<PathBuf>,
    pub jobs: usize,
    pub seed: u64,
    pub out_dir: PathBuf,
}

impl Default for PipelineConfig {
    fn default() -> Self {
        PipelineConfig {
            mask_provider: MaskProvider::Threshold,
            method: MethodSel::All,
            band: BandPassSpec::default(),
            detrend_window_s: 1.0,
            pos_window_s: 1.6,
            hr_window_s: 10.0,
            hr_stride_s: 1.0,
            snr_fund_halfwidth_hz: 0.1,
            snr_harm_halfwidth_hz: 0.2,
            cbcr: CbCrBox::default(),
            binarize_masks: false,
            gt_mask_dir: None,
            jobs: 1,
            seed: 0,
            out_dir: PathBuf::from("out"),
        }
    }
}

impl PipelineConfig {
    pub fn extract_opts(&self) -> ExtractOpts {
        ExtractOpts {
            band: self.band,
            detrend_window_s: self.detrend_window_s,
            pos_window_s: self.pos_window_s,
        }
    }

    pub fn snr_template(&self) -> rppg_core::eval::SnrTemplate {
        rppg_core::eval::SnrTemplate {
            fund_halfwidth_hz: self.snr_fund_halfwidth_hz,
            harm_halfwidth_hz: self.snr_harm_halfwidth_hz,
        }
    }

    /// Load a config file and apply it over the defaults.
    pub fn from_file(path: &Path) -> Result<Self> {
        let mut config = PipelineConfig::default();
        config.apply_file(path)?;
        Ok(config)
    }

    pub fn apply_file(&mut self, path: &Path) -> Result<()> {
        let text =
            fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))?;
        for (line_no, raw) in text.lines().enumerate() {
            let line = raw.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            let (key, value) = line.split_once('=').ok_or_else(|| {
                anyhow!("{}:{}: expected key = value", path.display(), line_no + 1)
            })?;
            self.set(key.trim(), value.trim())
                .with_context(|| format!("{}:{}", path.display(), line_no + 1))?;
        }
        Ok(())
    }

    /// Set one configuration key from its text form.
    pub fn set(&mut self, key: &str, value: &str) -> Result<()> {
        fn num(value: &str) -> Result<f64> {
            value
                .parse()
                .map_err(|_| anyhow!("expected a number, got {value:?}"))
        }
        match key {
            "mask_provider" => self.mask_provider = value.parse()?,
            "method" => self.method = value.parse()?,
            "band_lo_hz" => self.band.lo_hz = num(value)?,
            "band_hi_hz" => self.band.hi_hz = num(value)?,
            "filter_order" => {
                self.band.order = value
                    .parse()
                    .map_err(|_| anyhow!("expected an integer, got {value:?}"))?
            }
            "detrend_window_s" => self.detrend_window_s = num(value)?,
            "pos_window_s" => self.pos_window_s = num(value)?,
            "hr_window_s" => self.hr_window_s = num(value)?,
            "hr_stride_s" => self.hr_stride_s = num(value)?,
            "snr_fund_halfwidth_hz" => self.snr_fund_halfwidth_hz = num(value)?,
            "snr_harm_halfwidth_hz" => self.snr_harm_halfwidth_hz = num(value)?,
            "cb_lo" => self.cbcr.cb_lo = num(value)?,
            "cb_hi" => self.cbcr.cb_hi = num(value)?,
            "cr_lo" => self.cbcr.cr_lo = num(value)?,
            "cr_hi" => self.cbcr.cr_hi = num(value)?,
            "binarize_masks" => {
                self.binarize_masks = value
                    .parse()
                    .map_err(|_| anyhow!("expected true or false, got {value:?}"))?
            }
            "gt_mask_dir" => {
                self.gt_mask_dir = if value.is_empty() {
                    None
                } else {
                    Some(PathBuf::from(value))
                }
            }
            "jobs" => {
                self.jobs = value
                    .parse()
                    .map_err(|_| anyhow!("expected an integer, got {value:?}"))?
            }
            "seed" => {
                self.seed = value
                    .parse()
                    .map_err(|_| anyhow!("expected an integer, got {value:?}"))?
            }
            "out_dir" => self.out_dir = PathBuf::from(value),
            other => bail!("unknown configuration key {other:?}"),
        }
        Ok(())
    }

    /// Full parameter dump embedded in reports.
    pub fn echo(&self) -> serde_json::Value {
        serde_json::to_value(self).expect("config serializes")
    }
}

/// Parse a `lo:hi` band argument.
pub fn parse_band(s: &str) -> Result<(f64, f64)> {
    let (lo, hi) = s
        .split_once(':')
        .ok_or_else(|| anyhow!("expected lo:hi, got {s:?}"))?;
    Ok((
        lo.trim()
            .parse()
            .map_err(|_| anyhow!("bad band low {lo:?}"))?,
        hi.trim()
            .parse()
            .map_err(|_| anyhow!("bad band high {hi:?}"))?,
    ))
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::io::Write;

    #[test]
    fn file_overrides_defaults_and_rejects_unknown_keys() {
        let mut f = tempfile::NamedTempFile::new().unwrap();
        writeln!(
            f,
            "# comment\nmask_provider = landmarks\nband_lo_hz = 0.7\nmethod = POS\njobs = 4"
        )
        .unwrap();
        let config = PipelineConfig::from_file(f.path()).unwrap();
        assert_eq!(config.mask_provider, MaskProvider::Landmarks);
        assert_eq!(config.band.lo_hz, 0.7);
        assert_eq!(config.method, MethodSel::One(Method::Pos));
        assert_eq!(config.jobs, 4);
        assert_eq!(config.band.hi_hz, 3.3, "untouched keys keep defaults");

        let mut bad = tempfile::NamedTempFile::new().unwrap();
        writeln!(bad, "not_a_key = 1").unwrap();
        assert!(PipelineConfig::from_file(bad.path()).is_err());
    }

    #[test]
    fn band_argument_parses() {
        assert_eq!(parse_band("0.65:3.3").unwrap(), (0.65, 3.3));
        assert!(parse_band("nope").is_err());
    }

    #[test]
    fn echo_roundtrips() {
        let config = PipelineConfig::default();
        let echo = config.echo();
        let back: PipelineConfig = serde_json::from_value(echo).unwrap();
        assert_eq!(back, config);
    }
}
