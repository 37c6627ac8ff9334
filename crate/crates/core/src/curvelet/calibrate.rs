//! Per-subband noise levels and the robust pixel-domain noise estimate.

use std::sync::Arc;

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Normal};
use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::image::ImageBuffer;

use super::{CurveletGeometry, CurveletPyramid, CurveletTransform};

/// Standard deviation of white noise in every subband.
///
/// `sigma` is `sqrt(E|c|^2)` and `sigma_re` is `sqrt(E (Re c)^2)`; they differ
/// by about `sqrt 2` on complex-valued wedges and coincide on real bands.
#[derive(Debug, Clone, PartialEq)]
pub struct SubbandNoiseProfile {
    geometry: Arc<CurveletGeometry>,
    sigma_pixel: f64,
    sigma: Vec<f64>,
    sigma_re: Vec<f64>,
}

impl SubbandNoiseProfile {
    pub fn zeros(geometry: Arc<CurveletGeometry>) -> Self {
        let n = geometry.subband_count();
        Self {
            geometry,
            sigma_pixel: 0.0,
            sigma: vec![0.0; n],
            sigma_re: vec![0.0; n],
        }
    }

    /// Builds a profile from explicit per-subband levels.
    pub fn from_levels(
        geometry: Arc<CurveletGeometry>,
        sigma_pixel: f64,
        sigma: Vec<f64>,
        sigma_re: Vec<f64>,
    ) -> Result<Self> {
        let n = geometry.subband_count();
        if sigma.len() != n || sigma_re.len() != n {
            return Err(Error::GeometryMismatch);
        }
        if sigma.iter().chain(&sigma_re).any(|v| !(v.is_finite() && *v >= 0.0)) {
            return Err(Error::InvalidParameter("noise levels must be finite and >= 0".into()));
        }
        Ok(Self {
            geometry,
            sigma_pixel,
            sigma,
            sigma_re,
        })
    }

    pub fn geometry(&self) -> &Arc<CurveletGeometry> {
        &self.geometry
    }

    /// Pixel-domain standard deviation this profile was calibrated for.
    pub fn sigma_pixel(&self) -> f64 {
        self.sigma_pixel
    }

    pub fn sigma(&self) -> &[f64] {
        &self.sigma
    }

    pub fn sigma_re(&self) -> &[f64] {
        &self.sigma_re
    }

    pub fn level(&self, scale: usize, orientation: usize) -> Option<f64> {
        self.geometry.index_of(scale, orientation).map(|i| self.sigma[i])
    }

    /// Same profile rescaled to a different pixel-domain noise level.
    pub fn rescaled(&self, sigma_pixel: f64) -> Result<Self> {
        if !(sigma_pixel.is_finite() && sigma_pixel >= 0.0) {
            return Err(Error::InvalidParameter(format!("sigma {sigma_pixel}")));
        }
        if sigma_pixel == 0.0 {
            return Ok(Self::zeros(self.geometry.clone()));
        }
        if self.sigma_pixel <= 0.0 {
            return Err(Error::MissingCalibration("cannot rescale a zero profile".into()));
        }
        let k = sigma_pixel / self.sigma_pixel;
        Ok(Self {
            geometry: self.geometry.clone(),
            sigma_pixel,
            sigma: self.sigma.iter().map(|s| s * k).collect(),
            sigma_re: self.sigma_re.iter().map(|s| s * k).collect(),
        })
    }

    pub fn check_geometry(&self, pyr: &CurveletPyramid) -> Result<()> {
        if *self.geometry != **pyr.geometry() {
            return Err(Error::GeometryMismatch);
        }
        Ok(())
    }
}

/// Monte Carlo calibration: transforms `trials` images of i.i.d.
/// `N(0, sigma_pixel^2)` noise and returns the empirical per-subband
/// standard deviations. Trial `i` draws from stream `i` of `seed`.
pub fn calibrate_noise(
    transform: &CurveletTransform,
    sigma_pixel: f64,
    trials: usize,
    seed: u64,
) -> Result<SubbandNoiseProfile> {
    if !(sigma_pixel.is_finite() && sigma_pixel >= 0.0) {
        return Err(Error::InvalidParameter(format!("sigma {sigma_pixel}")));
    }
    if trials == 0 {
        return Err(Error::InvalidParameter("calibration needs at least one trial".into()));
    }
    let geometry = transform.geometry().clone();
    if sigma_pixel == 0.0 {
        return Ok(SubbandNoiseProfile::zeros(geometry));
    }
    let (w, h) = (geometry.width(), geometry.height());
    let normal = Normal::new(0.0, sigma_pixel).expect("valid sigma");

    let per_trial: Vec<Vec<(f64, f64)>> = (0..trials)
        .into_par_iter()
        .map(|t| {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            rng.set_stream(t as u64);
            let img = ImageBuffer::from_fn(w, h, |_| normal.sample(&mut rng))?;
            let pyr = transform.forward(&img)?;
            Ok(pyr
                .bands()
                .iter()
                .map(|b| {
                    let n = b.len() as f64;
                    let full: f64 = b.iter().map(|c| c.norm_sqr()).sum();
                    let re: f64 = b.iter().map(|c| c.re * c.re).sum();
                    (full / n, re / n)
                })
                .collect())
        })
        .collect::<Result<_>>()?;

    let bands = geometry.subband_count();
    let mut sigma = vec![0.0; bands];
    let mut sigma_re = vec![0.0; bands];
    for trial in &per_trial {
        for (i, (full, re)) in trial.iter().enumerate() {
            sigma[i] += full;
            sigma_re[i] += re;
        }
    }
    let n = trials as f64;
    sigma.iter_mut().for_each(|v| *v = (*v / n).sqrt());
    sigma_re.iter_mut().for_each(|v| *v = (*v / n).sqrt());
    SubbandNoiseProfile::from_levels(geometry, sigma_pixel, sigma, sigma_re)
}

/// Robust noise estimate from the finest scale: the median absolute real
/// part of the coefficients, each divided by its subband's unit-noise gain,
/// over 0.6745.
pub fn estimate_pixel_sigma(pyr: &CurveletPyramid, calibration: &SubbandNoiseProfile) -> Result<f64> {
    calibration.check_geometry(pyr)?;
    if calibration.sigma_pixel() <= 0.0 {
        return Err(Error::MissingCalibration(
            "noise estimation needs a nonzero calibration profile".into(),
        ));
    }
    let geometry = pyr.geometry();
    let finest = geometry.scale_range(geometry.scales() - 1);
    let mut samples = Vec::new();
    for i in finest {
        let gain = calibration.sigma_re()[i] / calibration.sigma_pixel();
        if gain <= 0.0 {
            continue;
        }
        samples.extend(pyr.bands()[i].iter().map(|c| c.re.abs() / gain));
    }
    if samples.is_empty() {
        return Err(Error::MissingCalibration("finest scale has no calibrated band".into()));
    }
    let mid = samples.len() / 2;
    let (_, median, _) = samples.select_nth_unstable_by(mid, f64::total_cmp);
    Ok(*median / 0.6745)
}
