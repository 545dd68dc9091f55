//! Per-frame skin weight masks from three providers: landmark regions with
//! angle-aware priority weighting, Cb-Cr color thresholding, and externally
//! supplied 16-bit mask rasters.
//!
//! The weighting scheme assigns forehead/cheek regions (`P1`) a weight of
//! `2 * (cos(theta) + 1)`, which is 4 facing the camera and clamps to 2
//! past a quarter turn. Other facial skin (`P2`) gets a fixed 2, remaining
//! body skin (`P3`) a fixed 1. Overlaps resolve by maximum, exclusion polygons (eyes,
//! eyebrows, mouth) force zero, and the raster is normalized by the global
//! maximum weight 4 so values land in [0, 1].

pub mod raster;

use std::fs;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::image::FrameImage;
use crate::linalg;

/// Global maximum pre-normalization weight (a `P1` region facing the camera).
pub const MAX_WEIGHT: f64 = 4.0;

/// Camera optical axis used when a region supplies 3-D points but no angle.
pub const DEFAULT_CAMERA_AXIS: [f64; 3] = [0.0, 0.0, 1.0];

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Serialize, Deserialize)]
pub enum Priority {
    P1,
    P2,
    P3,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct RegionSpec {
    pub name: String,
    pub priority: Priority,
    /// Pixel-coordinate vertices, at least 3.
    pub polygon: Vec<[f64; 2]>,
    /// Surface-to-camera angle in radians, `[0, pi]`.
    #[serde(default)]
    pub theta: Option<f64>,
    /// Optional 3-D landmark points used to fit the angle when absent.
    #[serde(default)]
    pub points3d: Option<Vec<[f64; 3]>>,
}

impl RegionSpec {
    /// The angle used for weighting: explicit `theta` wins, otherwise a plane
    /// fit of `points3d` against `camera_axis`. `P1` regions must yield one.
    pub fn resolve_theta(&self, camera_axis: [f64; 3]) -> Result<f64> {
        if let Some(theta) = self.theta {
            if !(0.0..=std::f64::consts::PI).contains(&theta) {
                return Err(Error::Validation(format!(
                    "region {:?}: theta {theta} outside [0, pi]",
                    self.name
                )));
            }
            return Ok(theta);
        }
        if let Some(points) = &self.points3d {
            return region_theta(points, camera_axis);
        }
        match self.priority {
            Priority::P1 => Err(Error::Validation(format!(
                "P1 region {:?} has neither theta nor points3d",
                self.name
            ))),
            // theta is ignored for fixed-weight priorities
            _ => Ok(0.0),
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.polygon.len() < 3 {
            return Err(Error::Validation(format!(
                "region {:?}: polygon needs at least 3 vertices",
                self.name
            )));
        }
        if self.polygon.iter().flatten().any(|v| !v.is_finite()) {
            return Err(Error::Validation(format!(
                "region {:?}: polygon has non-finite coordinates",
                self.name
            )));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct FrameLandmarks {
    pub frame_index: usize,
    pub regions: Vec<RegionSpec>,
    /// Polygons forced to zero weight (eyes, eyebrows, mouth).
    #[serde(default)]
    pub exclusions: Vec<Vec<[f64; 2]>>,
}

/// Dense per-pixel weight raster in `[0, 1]`.
#[derive(Debug, Clone, PartialEq)]
pub struct WeightMask {
    pub width: u32,
    pub height: u32,
    pub weights: Vec<f64>,
}

impl WeightMask {
    pub fn zeros(width: u32, height: u32) -> Self {
        WeightMask {
            width,
            height,
            weights: vec![0.0; (width as usize) * (height as usize)],
        }
    }

    #[inline]
    pub fn get(&self, x: u32, y: u32) -> f64 {
        self.weights[(y as usize) * (self.width as usize) + x as usize]
    }

    pub fn total_weight(&self) -> f64 {
        self.weights.iter().sum()
    }

    pub fn dims_match(&self, width: u32, height: u32) -> bool {
        self.width == width && self.height == height
    }

    /// Non-weighted variant: every positive weight becomes 1. This is the
    /// "full-body" ablation that keeps the segmentation but drops the
    /// prioritization.
    pub fn binarized(&self) -> WeightMask {
        WeightMask {
            width: self.width,
            height: self.height,
            weights: self
                .weights
                .iter()
                .map(|&w| if w > 0.0 { 1.0 } else { 0.0 })
                .collect(),
        }
    }
}

/// Pre-normalization region weight.
///
/// `P1` follows `2 * (cos(theta) + 1)` up to a quarter turn and holds the
/// boundary value 2 beyond it; `P2` and `P3` are fixed at 2 and 1.
pub fn priority_weight(theta: f64, priority: Priority) -> Result<f64> {
    if !(0.0..=std::f64::consts::PI).contains(&theta) {
        return Err(Error::Validation(format!("theta {theta} outside [0, pi]")));
    }
    Ok(match priority {
        Priority::P1 => {
            if theta <= std::f64::consts::FRAC_PI_2 {
                2.0 * (theta.cos() + 1.0)
            } else {
                2.0
            }
        }
        Priority::P2 => 2.0,
        Priority::P3 => 1.0,
    })
}

/// Angle between the least-squares plane normal of `points` and
/// `camera_axis`, folded into `[0, pi/2]` by picking the normal orientation
/// closest to the axis.
pub fn region_theta(points: &[[f64; 3]], camera_axis: [f64; 3]) -> Result<f64> {
    if points.len() < 3 {
        return Err(Error::DegeneratePoints(format!(
            "need at least 3 points, got {}",
            points.len()
        )));
    }
    let axis_norm = linalg::norm3(&camera_axis);
    if axis_norm < 1e-12 {
        return Err(Error::Validation("camera axis must be nonzero".into()));
    }

    let n = points.len() as f64;
    let mut centroid = [0.0; 3];
    for p in points {
        for k in 0..3 {
            centroid[k] += p[k] / n;
        }
    }
    let mut cov = [[0.0; 3]; 3];
    for p in points {
        let d = [p[0] - centroid[0], p[1] - centroid[1], p[2] - centroid[2]];
        for i in 0..3 {
            for j in 0..3 {
                cov[i][j] += d[i] * d[j];
            }
        }
    }

    let (vals, vecs) = linalg::sym_eigen3(&cov);
    // Collinear or coincident points leave the plane (and its normal)
    // underdetermined: the two largest spreads must both be nonzero.
    if vals[1] <= 1e-9 * vals[0].max(1e-300) || vals[0] <= 1e-12 {
        return Err(Error::DegeneratePoints(
            "points are collinear or coincident; plane normal undefined".into(),
        ));
    }
    let normal = vecs[2]; // smallest-spread direction
    let cos = (linalg::dot3(&normal, &camera_axis) / axis_norm)
        .abs()
        .clamp(0.0, 1.0);
    Ok(cos.acos())
}

/// Compose a frame's regions into a normalized weight mask: rasterize each
/// polygon at its priority weight (maximum wins on overlap), zero out
/// exclusions, divide by the global maximum 4.
pub fn synthesize_mask(landmarks: &FrameLandmarks, width: u32, height: u32) -> Result<WeightMask> {
    let mut mask = WeightMask::zeros(width, height);
    for region in &landmarks.regions {
        region.validate()?;
        let theta = region.resolve_theta(DEFAULT_CAMERA_AXIS)?;
        let w = priority_weight(theta, region.priority)?;
        raster::fill_polygon(&mut mask.weights, width, height, &region.polygon, |c| {
            if w > *c {
                *c = w;
            }
        });
    }
    for exclusion in &landmarks.exclusions {
        if exclusion.iter().flatten().any(|v| !v.is_finite()) {
            return Err(Error::Validation(
                "exclusion polygon has non-finite coordinates".into(),
            ));
        }
        raster::fill_polygon(&mut mask.weights, width, height, exclusion, |c| *c = 0.0);
    }
    for w in &mut mask.weights {
        *w /= MAX_WEIGHT;
    }
    Ok(mask)
}

/// Inclusive Cb/Cr acceptance box for color-threshold segmentation.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CbCrBox {
    pub cb_lo: f64,
    pub cb_hi: f64,
    pub cr_lo: f64,
    pub cr_hi: f64,
}

impl Default for CbCrBox {
    fn default() -> Self {
        // widely used skin cluster in the Cb-Cr plane
        CbCrBox {
            cb_lo: 77.0,
            cb_hi: 127.0,
            cr_lo: 133.0,
            cr_hi: 173.0,
        }
    }
}

impl CbCrBox {
    pub fn validate(&self) -> Result<()> {
        if self.cb_lo > self.cb_hi || self.cr_lo > self.cr_hi {
            return Err(Error::Validation(format!("invalid Cb-Cr box {self:?}")));
        }
        Ok(())
    }
}

/// Full-range BT.601 chroma components of an RGB pixel.
#[inline]
pub fn rgb_to_cbcr(rgb: [u8; 3]) -> (f64, f64) {
    let (r, g, b) = (rgb[0] as f64, rgb[1] as f64, rgb[2] as f64);
    let cb = 128.0 - 0.168736 * r - 0.331264 * g + 0.5 * b;
    let cr = 128.0 + 0.5 * r - 0.418688 * g - 0.081312 * b;
    (cb, cr)
}

/// Binary skin mask from Cb-Cr thresholding: weight 1 inside the box, 0 out.
pub fn skin_threshold_mask(frame: &FrameImage, params: &CbCrBox) -> Result<WeightMask> {
    params.validate()?;
    let mut mask = WeightMask::zeros(frame.width, frame.height);
    for (i, rgb) in frame.data.chunks_exact(3).enumerate() {
        let (cb, cr) = rgb_to_cbcr([rgb[0], rgb[1], rgb[2]]);
        if cb >= params.cb_lo && cb <= params.cb_hi && cr >= params.cr_lo && cr <= params.cr_hi {
            mask.weights[i] = 1.0;
        }
    }
    Ok(mask)
}

/// Archive filename for the mask of a given frame.
pub fn mask_filename(frame_index: usize) -> String {
    format!("mask_{frame_index:06}.png")
}

/// Load one externally produced mask (16-bit grayscale PNG, weight =
/// `pixel / 65535`) from an archive directory.
pub fn load_external_mask(dir: &Path, frame_index: usize) -> Result<WeightMask> {
    let path = dir.join(mask_filename(frame_index));
    if !path.exists() {
        return Err(Error::MissingFrameMask {
            dir: dir.to_path_buf(),
            frame_index,
        });
    }
    load_mask_png(&path)
}

pub fn load_mask_png(path: &Path) -> Result<WeightMask> {
    let img = image::open(path).map_err(|e| Error::ImageDecode {
        path: path.to_path_buf(),
        source: e,
    })?;
    let buf = match img {
        image::DynamicImage::ImageLuma16(buf) => buf,
        _ => return Err(Error::MaskBitDepth(path.to_path_buf())),
    };
    let (width, height) = buf.dimensions();
    let weights = buf.into_raw().iter().map(|&v| v as f64 / 65535.0).collect();
    Ok(WeightMask {
        width,
        height,
        weights,
    })
}

/// Write a mask as 16-bit grayscale PNG (`round(w * 65535)`, clamped).
pub fn save_mask_png(mask: &WeightMask, path: &Path) -> Result<()> {
    let raw: Vec<u16> = mask
        .weights
        .iter()
        .map(|&w| (w.clamp(0.0, 1.0) * 65535.0).round() as u16)
        .collect();
    let buf: image::ImageBuffer<image::Luma<u16>, Vec<u16>> =
        image::ImageBuffer::from_raw(mask.width, mask.height, raw)
            .expect("weights length matches dimensions");
    image::DynamicImage::ImageLuma16(buf)
        .save(path)
        .map_err(|e| Error::ImageEncode {
            path: path.to_path_buf(),
            source: e,
        })
}

/// Load a landmarks file: a JSON array of per-frame entries.
pub fn load_landmarks(path: &Path) -> Result<Vec<FrameLandmarks>> {
    let text = fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    let frames: Vec<FrameLandmarks> =
        serde_json::from_str(&text).map_err(|e| Error::parse(path, e.to_string()))?;
    let mut seen = std::collections::BTreeSet::new();
    for fl in &frames {
        if !seen.insert(fl.frame_index) {
            return Err(Error::Validation(format!(
                "duplicate frame_index {} in {}",
                fl.frame_index,
                path.display()
            )));
        }
        let mut names = std::collections::BTreeSet::new();
        for r in &fl.regions {
            r.validate()?;
            if !names.insert(r.name.clone()) {
                return Err(Error::Validation(format!(
                    "frame {}: duplicate region name {:?}",
                    fl.frame_index, r.name
                )));
            }
        }
    }
    Ok(frames)
}

pub fn save_landmarks(frames: &[FrameLandmarks], path: &Path) -> Result<()> {
    let text =
        serde_json::to_string_pretty(frames).map_err(|e| Error::parse(path, e.to_string()))?;
    fs::write(path, text).map_err(|e| Error::io(path, e))
}

/// Where a provider's masks for a record live inside an archive root.
pub fn record_mask_dir(root: &Path, record_id: &str) -> PathBuf {
    root.join(record_id)
}
