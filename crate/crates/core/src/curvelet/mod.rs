//! Second-generation discrete curvelet transform via wrapping.
//!
//! The transform is a Parseval tight frame: `inverse` is the exact adjoint
//! of `forward` and `inverse(forward(x)) == x` up to rounding. Coefficients
//! are complex. Flat ordering is scale-major, then orientation
//! counterclockwise from the positive column-frequency axis, then row-major
//! position inside the subband rectangle.

mod calibrate;
mod container;
mod fft;
mod geometry;
mod window;

use std::collections::HashMap;
use std::sync::Arc;

use ndarray::Array2;
use num_complex::Complex64;
use rayon::prelude::*;
use rustfft::FftPlanner;

use crate::error::{Error, Result};
use crate::image::{DynamicRange, ImageBuffer};

pub use calibrate::{calibrate_noise, estimate_pixel_sigma, SubbandNoiseProfile};
pub use container::{decode_pyramid, encode_pyramid, read_pyramid, write_pyramid};
pub use geometry::{
    angles_at, default_scales, CurveletGeometry, CurveletParams, FinestLevel, Subband,
    MIN_TRANSFORM_SIDE,
};

use fft::Fft2;

/// Coefficients of one image: one complex array per subband.
#[derive(Debug, Clone)]
pub struct CurveletPyramid {
    geometry: Arc<CurveletGeometry>,
    bands: Vec<Array2<Complex64>>,
    range: DynamicRange,
}

impl CurveletPyramid {
    pub fn zeros(geometry: Arc<CurveletGeometry>) -> Self {
        let bands = geometry
            .subbands()
            .iter()
            .map(|s| Array2::zeros((s.rows, s.cols)))
            .collect();
        Self {
            geometry,
            bands,
            range: DynamicRange::default(),
        }
    }

    /// Builds a pyramid from raw subband arrays, checking their shapes.
    pub fn from_bands(geometry: Arc<CurveletGeometry>, bands: Vec<Array2<Complex64>>) -> Result<Self> {
        if bands.len() != geometry.subband_count()
            || bands
                .iter()
                .zip(geometry.subbands())
                .any(|(b, s)| b.dim() != (s.rows, s.cols))
        {
            return Err(Error::GeometryMismatch);
        }
        Ok(Self {
            geometry,
            bands,
            range: DynamicRange::default(),
        })
    }

    pub fn geometry(&self) -> &Arc<CurveletGeometry> {
        &self.geometry
    }

    pub fn range(&self) -> DynamicRange {
        self.range
    }

    pub fn bands(&self) -> &[Array2<Complex64>] {
        &self.bands
    }

    pub fn bands_mut(&mut self) -> &mut [Array2<Complex64>] {
        &mut self.bands
    }

    pub fn band(&self, scale: usize, orientation: usize) -> Option<&Array2<Complex64>> {
        self.geometry
            .index_of(scale, orientation)
            .map(|i| &self.bands[i])
    }

    pub fn check_geometry(&self, other: &CurveletPyramid) -> Result<()> {
        if *self.geometry != *other.geometry {
            return Err(Error::GeometryMismatch);
        }
        Ok(())
    }

    /// Squared l2 norm over all coefficients.
    pub fn energy(&self) -> f64 {
        self.bands.iter().map(band_energy).sum()
    }

    /// Real inner product `Re sum conj(a) b`.
    pub fn dot(&self, other: &CurveletPyramid) -> Result<f64> {
        self.check_geometry(other)?;
        Ok(self
            .bands
            .iter()
            .zip(&other.bands)
            .map(|(a, b)| a.iter().zip(b).map(|(x, y)| (x.conj() * y).re).sum::<f64>())
            .sum())
    }

    /// `self + scale * other`.
    pub fn add_scaled(&self, other: &CurveletPyramid, scale: f64) -> Result<CurveletPyramid> {
        self.check_geometry(other)?;
        let bands = self
            .bands
            .iter()
            .zip(&other.bands)
            .map(|(a, b)| {
                let mut out = a.clone();
                out.zip_mut_with(b, |x, y| *x += y * scale);
                out
            })
            .collect();
        Ok(Self {
            geometry: self.geometry.clone(),
            bands,
            range: self.range,
        })
    }

    pub fn add(&self, other: &CurveletPyramid) -> Result<CurveletPyramid> {
        self.add_scaled(other, 1.0)
    }

    pub fn sub(&self, other: &CurveletPyramid) -> Result<CurveletPyramid> {
        self.add_scaled(other, -1.0)
    }

    /// All coefficients in flat order.
    pub fn to_vec(&self) -> Vec<Complex64> {
        self.bands.iter().flat_map(|b| b.iter().copied()).collect()
    }

    pub(crate) fn with_range(mut self, range: DynamicRange) -> Self {
        self.range = range;
        self
    }
}

pub(crate) fn band_energy(b: &Array2<Complex64>) -> f64 {
    b.iter().map(|c| c.norm_sqr()).sum()
}

/// Forward / adjoint operator for one image geometry, with FFT plans cached.
#[derive(Clone)]
pub struct CurveletTransform {
    geometry: Arc<CurveletGeometry>,
    full: Fft2,
    band_ffts: Vec<Fft2>,
}

impl std::fmt::Debug for CurveletTransform {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("CurveletTransform")
            .field("width", &self.geometry.width())
            .field("height", &self.geometry.height())
            .field("params", self.geometry.params())
            .finish()
    }
}

impl CurveletTransform {
    pub fn new(width: usize, height: usize, params: CurveletParams) -> Result<Self> {
        let geometry = Arc::new(CurveletGeometry::new(width, height, params)?);
        let mut planner = FftPlanner::new();
        let full = Fft2::new(&mut planner, height, width);
        let mut plans: HashMap<(usize, usize), Fft2> = HashMap::new();
        let band_ffts = geometry
            .subbands()
            .iter()
            .map(|s| {
                plans
                    .entry((s.rows, s.cols))
                    .or_insert_with(|| Fft2::new(&mut planner, s.rows, s.cols))
                    .clone()
            })
            .collect();
        Ok(Self {
            geometry,
            full,
            band_ffts,
        })
    }

    /// Transform with the default parameters for this image size.
    pub fn for_image(img: &ImageBuffer) -> Result<Self> {
        Self::new(
            img.width(),
            img.height(),
            CurveletParams::for_size(img.width(), img.height()),
        )
    }

    pub fn geometry(&self) -> &Arc<CurveletGeometry> {
        &self.geometry
    }

    fn check_image(&self, img: &ImageBuffer) -> Result<()> {
        let expected = (self.geometry.height(), self.geometry.width());
        if img.dim() != expected {
            return Err(Error::DimensionMismatch {
                left: expected,
                right: img.dim(),
            });
        }
        Ok(())
    }

    /// Analysis `Psi x`.
    pub fn forward(&self, img: &ImageBuffer) -> Result<CurveletPyramid> {
        self.check_image(img)?;
        let n = img.len() as f64;
        let mut spectrum: Vec<Complex64> = img.pixels().iter().map(|&v| Complex64::new(v, 0.0)).collect();
        self.full.forward(&mut spectrum);

        let bands = self
            .geometry
            .subbands()
            .par_iter()
            .zip(self.band_ffts.par_iter())
            .map(|(band, plan)| {
                let mut buf = vec![Complex64::default(); band.len()];
                for t in &band.taps {
                    buf[t.wrapped] = spectrum[t.freq] * t.weight;
                }
                plan.inverse(&mut buf);
                let norm = 1.0 / (band.len() as f64 * n).sqrt();
                buf.iter_mut().for_each(|c| *c *= norm);
                Array2::from_shape_vec((band.rows, band.cols), buf).expect("band shape")
            })
            .collect();
        Ok(CurveletPyramid {
            geometry: self.geometry.clone(),
            bands,
            range: img.range(),
        })
    }

    /// Synthesis `Psi^T c`, the adjoint and (tight frame) inverse of [`forward`](Self::forward).
    pub fn inverse(&self, pyr: &CurveletPyramid) -> Result<ImageBuffer> {
        if *pyr.geometry != *self.geometry {
            return Err(Error::GeometryMismatch);
        }
        let (h, w) = (self.geometry.height(), self.geometry.width());
        let n = (h * w) as f64;
        let contributions: Vec<Vec<Complex64>> = pyr
            .bands
            .par_iter()
            .zip(self.band_ffts.par_iter())
            .map(|(coeffs, plan)| {
                let mut buf: Vec<Complex64> = coeffs.iter().copied().collect();
                plan.forward(&mut buf);
                buf
            })
            .collect();

        // Accumulate in subband order so the result does not depend on scheduling.
        let mut spectrum = vec![Complex64::default(); h * w];
        for (band, buf) in self.geometry.subbands().iter().zip(&contributions) {
            let norm = 1.0 / (band.len() as f64 * n).sqrt();
            for t in &band.taps {
                spectrum[t.freq] += buf[t.wrapped] * (t.weight * norm);
            }
        }

        // Hermitian symmetrization: keeps exactly the real part of the synthesis.
        let mut sym = vec![Complex64::default(); h * w];
        for r in 0..h {
            let rr = (h - r) % h;
            for c in 0..w {
                let cc = (w - c) % w;
                sym[r * w + c] = (spectrum[r * w + c] + spectrum[rr * w + cc].conj()) * 0.5;
            }
        }
        self.full.inverse(&mut sym);
        let pixels = Array2::from_shape_vec((h, w), sym.into_iter().map(|c| c.re).collect())
            .expect("image shape");
        ImageBuffer::new(pixels, pyr.range)
    }
}

/// `forward` with a freshly built transform; `scales = None` uses the default count.
pub fn forward(img: &ImageBuffer, scales: Option<usize>) -> Result<CurveletPyramid> {
    let mut params = CurveletParams::for_size(img.width(), img.height());
    if let Some(s) = scales {
        params.scales = s;
    }
    CurveletTransform::new(img.width(), img.height(), params)?.forward(img)
}

/// `inverse` for a pyramid produced by [`forward`].
pub fn inverse(pyr: &CurveletPyramid) -> Result<ImageBuffer> {
    let g = pyr.geometry();
    CurveletTransform::new(g.width(), g.height(), *g.params())?.inverse(pyr)
}
