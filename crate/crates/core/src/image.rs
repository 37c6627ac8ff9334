//! Grayscale image container and 8-bit PGM / PNG I/O.

use std::path::Path;

use ndarray::Array2;

use crate::error::{Error, Result};

/// Smallest side accepted for any image.
pub const MIN_SIDE: usize = 8;

/// Intensity interval `[min, max]` an image is expected to live in.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DynamicRange {
    pub min: f64,
    pub max: f64,
}

impl DynamicRange {
    pub const EIGHT_BIT: DynamicRange = DynamicRange { min: 0.0, max: 255.0 };

    pub fn new(min: f64, max: f64) -> Result<Self> {
        if !(min.is_finite() && max.is_finite() && min < max) {
            return Err(Error::InvalidParameter(format!(
                "dynamic range [{min}, {max}] must satisfy min < max"
            )));
        }
        Ok(Self { min, max })
    }

    pub fn span(&self) -> f64 {
        self.max - self.min
    }

    pub fn clamp(&self, v: f64) -> f64 {
        v.clamp(self.min, self.max)
    }
}

impl Default for DynamicRange {
    fn default() -> Self {
        Self::EIGHT_BIT
    }
}

/// Real-valued 2D image. Values may leave the dynamic range while a solver
/// works on them; [`ImageBuffer::clamped`] brings them back for output.
#[derive(Debug, Clone, PartialEq)]
pub struct ImageBuffer {
    pixels: Array2<f64>,
    range: DynamicRange,
}

impl ImageBuffer {
    /// Wraps a `height x width` array.
    pub fn new(pixels: Array2<f64>, range: DynamicRange) -> Result<Self> {
        let (h, w) = pixels.dim();
        if h < MIN_SIDE || w < MIN_SIDE {
            return Err(Error::ImageTooSmall {
                width: w,
                height: h,
                min: MIN_SIDE,
            });
        }
        Ok(Self { pixels, range })
    }

    pub fn from_array(pixels: Array2<f64>) -> Result<Self> {
        Self::new(pixels, DynamicRange::default())
    }

    pub fn filled(width: usize, height: usize, value: f64) -> Result<Self> {
        Self::from_array(Array2::from_elem((height, width), value))
    }

    pub fn from_fn(
        width: usize,
        height: usize,
        f: impl FnMut((usize, usize)) -> f64,
    ) -> Result<Self> {
        Self::from_array(Array2::from_shape_fn((height, width), f))
    }

    pub fn width(&self) -> usize {
        self.pixels.ncols()
    }

    pub fn height(&self) -> usize {
        self.pixels.nrows()
    }

    /// `(height, width)`, the ndarray shape.
    pub fn dim(&self) -> (usize, usize) {
        self.pixels.dim()
    }

    pub fn len(&self) -> usize {
        self.pixels.len()
    }

    pub fn is_empty(&self) -> bool {
        self.pixels.is_empty()
    }

    pub fn range(&self) -> DynamicRange {
        self.range
    }

    pub fn pixels(&self) -> &Array2<f64> {
        &self.pixels
    }

    pub fn pixels_mut(&mut self) -> &mut Array2<f64> {
        &mut self.pixels
    }

    pub fn into_pixels(self) -> Array2<f64> {
        self.pixels
    }

    /// Same range and shape, new values.
    pub fn with_pixels(&self, pixels: Array2<f64>) -> Result<Self> {
        self.check_shape(pixels.dim())?;
        Ok(Self {
            pixels,
            range: self.range,
        })
    }

    pub fn with_range(mut self, range: DynamicRange) -> Self {
        self.range = range;
        self
    }

    pub fn check_same_dims(&self, other: &ImageBuffer) -> Result<()> {
        self.check_shape(other.dim())
    }

    pub(crate) fn check_shape(&self, dim: (usize, usize)) -> Result<()> {
        if self.dim() != dim {
            return Err(Error::DimensionMismatch {
                left: self.dim(),
                right: dim,
            });
        }
        Ok(())
    }

    pub fn clamped(&self) -> ImageBuffer {
        let r = self.range;
        ImageBuffer {
            pixels: self.pixels.mapv(|v| r.clamp(v)),
            range: r,
        }
    }

    /// Quantizes to 8 bits: clamp, rescale the range onto 0..=255, round half to even.
    pub fn to_u8(&self) -> Vec<u8> {
        let r = self.range;
        let scale = 255.0 / r.span();
        self.pixels
            .iter()
            .map(|&v| ((r.clamp(v) - r.min) * scale).round_ties_even() as u8)
            .collect()
    }

    /// Builds an image from 8-bit samples mapped linearly onto `range`.
    pub fn from_u8(width: usize, height: usize, data: &[u8], range: DynamicRange) -> Result<Self> {
        if data.len() != width * height {
            return Err(Error::InvalidParameter(format!(
                "expected {} samples, got {}",
                width * height,
                data.len()
            )));
        }
        let scale = range.span() / 255.0;
        let pixels = Array2::from_shape_fn((height, width), |(r, c)| {
            range.min + data[r * width + c] as f64 * scale
        });
        Self::new(pixels, range)
    }

    /// Reads an 8-bit grayscale PGM or PNG (color inputs are converted to luma).
    pub fn load(path: impl AsRef<Path>) -> Result<Self> {
        let path = path.as_ref();
        let img = image::open(path)
            .map_err(|source| Error::Codec {
                path: path.to_path_buf(),
                source,
            })?
            .into_luma8();
        let (w, h) = img.dimensions();
        Self::from_u8(w as usize, h as usize, img.as_raw(), DynamicRange::EIGHT_BIT)
    }

    /// Writes binary PGM (`.pgm`) or PNG (anything else).
    pub fn save(&self, path: impl AsRef<Path>) -> Result<()> {
        let path = path.as_ref();
        let data = self.to_u8();
        let is_pgm = path
            .extension()
            .and_then(|e| e.to_str())
            .is_some_and(|e| e.eq_ignore_ascii_case("pgm"));
        if is_pgm {
            let mut bytes = format!("P5\n{} {}\n255\n", self.width(), self.height()).into_bytes();
            bytes.extend_from_slice(&data);
            std::fs::write(path, bytes).map_err(|source| Error::Io {
                path: path.to_path_buf(),
                source,
            })
        } else {
            image::save_buffer(
                path,
                &data,
                self.width() as u32,
                self.height() as u32,
                image::ExtendedColorType::L8,
            )
            .map_err(|source| Error::Codec {
                path: path.to_path_buf(),
                source,
            })
        }
    }

    /// Sum of squared pixel values.
    pub fn energy(&self) -> f64 {
        self.pixels.iter().map(|v| v * v).sum()
    }
}
