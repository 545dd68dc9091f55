//! 8-bit RGB frame raster shared by the ingest, mask, trace, and synth stages.

use std::path::Path;

use crate::error::{Error, Result};

/// Interleaved 8-bit RGB image.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct FrameImage {
    pub width: u32,
    pub height: u32,
    /// Row-major RGB triples, `3 * width * height` bytes.
    pub data: Vec<u8>,
}

impl FrameImage {
    pub fn new(width: u32, height: u32) -> Self {
        FrameImage {
            width,
            height,
            data: vec![0; (width as usize) * (height as usize) * 3],
        }
    }

    pub fn from_raw(width: u32, height: u32, data: Vec<u8>) -> Result<Self> {
        if data.len() != (width as usize) * (height as usize) * 3 {
            return Err(Error::DimensionMismatch(format!(
                "raw buffer of {} bytes does not match {}x{} RGB",
                data.len(),
                width,
                height
            )));
        }
        Ok(FrameImage {
            width,
            height,
            data,
        })
    }

    #[inline]
    pub fn pixel(&self, x: u32, y: u32) -> [u8; 3] {
        let i = ((y as usize) * (self.width as usize) + x as usize) * 3;
        [self.data[i], self.data[i + 1], self.data[i + 2]]
    }

    #[inline]
    pub fn set_pixel(&mut self, x: u32, y: u32, rgb: [u8; 3]) {
        let i = ((y as usize) * (self.width as usize) + x as usize) * 3;
        self.data[i..i + 3].copy_from_slice(&rgb);
    }

    pub fn num_pixels(&self) -> usize {
        (self.width as usize) * (self.height as usize)
    }

    pub fn load(path: &Path) -> Result<Self> {
        let img = image::open(path)
            .map_err(|e| Error::ImageDecode {
                path: path.to_path_buf(),
                source: e,
            })?
            .to_rgb8();
        let (width, height) = img.dimensions();
        Ok(FrameImage {
            width,
            height,
            data: img.into_raw(),
        })
    }

    pub fn save(&self, path: &Path) -> Result<()> {
        let buf: image::RgbImage =
            image::ImageBuffer::from_raw(self.width, self.height, self.data.clone())
                .expect("buffer length checked by constructor");
        buf.save(path).map_err(|e| Error::ImageEncode {
            path: path.to_path_buf(),
            source: e,
        })
    }
}
