//! Adaptive curvelet thresholding: MAP soft shrinkage under a Laplacian
//! prior with a locally estimated signal variance per coefficient.

use std::str::FromStr;

use ndarray::Array2;
use num_complex::Complex64;
use rayon::prelude::*;

use crate::curvelet::{
    calibrate_noise, estimate_pixel_sigma, CurveletPyramid, CurveletTransform, SubbandNoiseProfile,
};
use crate::error::{Error, Result};
use crate::image::ImageBuffer;
use crate::impulse::{detect, DetectorConfig, NoiseKind, PixelMask};

/// `sgn(y) * max(0, |y| - rho)`.
pub fn soft_shrink(y: f64, rho: f64) -> f64 {
    y.signum() * (y.abs() - rho).max(0.0)
}

/// Soft shrinkage of the modulus, keeping the phase.
pub fn soft_shrink_complex(y: Complex64, rho: f64) -> Complex64 {
    let m = y.norm();
    if m <= rho {
        Complex64::default()
    } else {
        y * ((m - rho) / m)
    }
}

/// Pixel-domain noise level handed to a denoiser.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum NoiseLevel {
    Declared(f64),
    /// Estimated from the median-filtered initialization.
    Auto,
}

impl FromStr for NoiseLevel {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        if s.eq_ignore_ascii_case("auto") {
            return Ok(Self::Auto);
        }
        let v: f64 = s
            .parse()
            .map_err(|_| Error::InvalidParameter(format!("noise level '{s}'")))?;
        if !(v.is_finite() && v >= 0.0) {
            return Err(Error::InvalidParameter(format!("noise level {v}")));
        }
        Ok(Self::Declared(v))
    }
}

/// Mean over a `window x window` neighborhood with replicate padding, or the
/// whole-array mean when the window does not fit.
pub(crate) fn local_mean(a: &Array2<f64>, window: usize) -> Array2<f64> {
    let (h, w) = a.dim();
    if window > h || window > w {
        let mean = a.mean().unwrap_or(0.0);
        return Array2::from_elem((h, w), mean);
    }
    let half = (window / 2) as isize;
    let clampi = |i: isize, n: usize| i.clamp(0, n as isize - 1) as usize;
    let box_1d = |line: &[f64], out: &mut [f64]| {
        let n = line.len();
        let mut sum: f64 = (-half..=half).map(|d| line[clampi(d, n)]).sum();
        out[0] = sum;
        for i in 1..n {
            sum += line[clampi(i as isize + half, n)] - line[clampi(i as isize - 1 - half, n)];
            out[i] = sum;
        }
    };
    let mut rows = Array2::zeros((h, w));
    let mut line = vec![0.0; w];
    let mut out = vec![0.0; w];
    for r in 0..h {
        line.iter_mut().zip(a.row(r)).for_each(|(d, s)| *d = *s);
        box_1d(&line, &mut out);
        rows.row_mut(r).iter_mut().zip(&out).for_each(|(d, s)| *d = *s);
    }
    let mut result = Array2::zeros((h, w));
    let mut line = vec![0.0; h];
    let mut out = vec![0.0; h];
    let area = (window * window) as f64;
    for c in 0..w {
        line.iter_mut().zip(rows.column(c)).for_each(|(d, s)| *d = *s);
        box_1d(&line, &mut out);
        result.column_mut(c).iter_mut().zip(&out).for_each(|(d, s)| *d = *s / area);
    }
    result
}

fn check_window(window: usize) -> Result<()> {
    if window == 0 || window.is_multiple_of(2) {
        return Err(Error::InvalidParameter(format!("window {window} must be odd")));
    }
    Ok(())
}

/// Per-coefficient ML variance `max(0, mean_window |c|^2 - sigma_n^2)`, one array per subband.
pub fn estimate_signal_variance(
    pyr: &CurveletPyramid,
    profile: &SubbandNoiseProfile,
    window: usize,
) -> Result<Vec<Array2<f64>>> {
    check_window(window)?;
    profile.check_geometry(pyr)?;
    Ok(pyr
        .bands()
        .par_iter()
        .zip(profile.sigma().par_iter())
        .map(|(band, &sn)| {
            let power = band.mapv(|c| c.norm_sqr());
            local_mean(&power, window).mapv(|m| (m - sn * sn).max(0.0))
        })
        .collect())
}

/// Thresholds `rho = sqrt(2) sigma_n^2 / sigma` for every coefficient.
#[derive(Debug, Clone)]
pub struct ShrinkageField {
    thresholds: Vec<Array2<f64>>,
}

impl ShrinkageField {
    pub fn new(pyr: &CurveletPyramid, profile: &SubbandNoiseProfile, window: usize) -> Result<Self> {
        let variance = estimate_signal_variance(pyr, profile, window)?;
        let thresholds = variance
            .into_iter()
            .zip(profile.sigma())
            .map(|(var, &sn)| var.mapv(|v| threshold(sn, v.sqrt())))
            .collect();
        Ok(Self { thresholds })
    }

    pub fn thresholds(&self) -> &[Array2<f64>] {
        &self.thresholds
    }
}

fn threshold(sigma_n: f64, sigma: f64) -> f64 {
    if sigma_n == 0.0 {
        0.0
    } else if sigma == 0.0 {
        f64::INFINITY
    } else {
        std::f64::consts::SQRT_2 * sigma_n * sigma_n / sigma
    }
}

/// Adaptive soft shrinkage of every detail coefficient. The coarse low-pass
/// band passes through.
pub fn act_shrink(
    pyr: &CurveletPyramid,
    profile: &SubbandNoiseProfile,
    window: usize,
) -> Result<CurveletPyramid> {
    let field = ShrinkageField::new(pyr, profile, window)?;
    let coarse = pyr.geometry().scale_range(0);
    let mut out = pyr.clone();
    out.bands_mut()
        .par_iter_mut()
        .zip(field.thresholds.par_iter())
        .enumerate()
        .filter(|(i, _)| !coarse.contains(i))
        .for_each(|(_, (band, rho))| {
            band.zip_mut_with(rho, |c, &r| *c = soft_shrink_complex(*c, r));
        });
    Ok(out)
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ActConfig {
    pub iters: usize,
    pub ml_window: usize,
    /// Noise level of iteration `t` is `sigma * decay^t`.
    pub decay: f64,
    /// Pull of clean-mask pixels back toward the observation after each pass.
    pub blend: f64,
    pub calibration_trials: usize,
    pub calibration_seed: u64,
    pub detector: DetectorConfig,
}

impl Default for ActConfig {
    fn default() -> Self {
        Self {
            iters: 11,
            ml_window: 7,
            decay: 0.8,
            blend: 0.1,
            calibration_trials: 30,
            calibration_seed: 0,
            detector: DetectorConfig::default(),
        }
    }
}

impl ActConfig {
    pub fn validate(&self) -> Result<()> {
        if self.iters == 0 {
            return Err(Error::InvalidParameter("iters must be at least 1".into()));
        }
        check_window(self.ml_window)?;
        if !(self.decay > 0.0 && self.decay <= 1.0) {
            return Err(Error::InvalidParameter(format!("decay {} not in (0, 1]", self.decay)));
        }
        if !(0.0..=1.0).contains(&self.blend) {
            return Err(Error::InvalidParameter(format!("blend {} not in [0, 1]", self.blend)));
        }
        if self.calibration_trials == 0 {
            return Err(Error::InvalidParameter("calibration_trials must be at least 1".into()));
        }
        Ok(())
    }
}

/// Unit-variance profile for `transform` and the pixel noise level to use.
pub(crate) fn resolve_noise(
    transform: &CurveletTransform,
    u_init: &ImageBuffer,
    level: NoiseLevel,
    trials: usize,
    seed: u64,
) -> Result<(SubbandNoiseProfile, f64)> {
    let unit = calibrate_noise(transform, 1.0, trials, seed)?;
    let sigma = match level {
        NoiseLevel::Declared(s) => s,
        NoiseLevel::Auto => estimate_pixel_sigma(&transform.forward(u_init)?, &unit)?,
    };
    Ok((unit, sigma))
}

#[derive(Debug, Clone)]
pub struct ActOutput {
    pub image: ImageBuffer,
    pub sigma: f64,
    pub mask: PixelMask,
    pub u_init: ImageBuffer,
}

/// Iterative ACT: median-filter initialization, then `iters` passes of
/// forward transform, adaptive shrinkage, inverse, and a partial reset of
/// clean-mask pixels toward `f`.
pub fn act_denoise(f: &ImageBuffer, kind: NoiseKind, level: NoiseLevel, cfg: &ActConfig) -> Result<ActOutput> {
    cfg.validate()?;
    let init = detect(f, kind, &cfg.detector)?;
    let transform = CurveletTransform::for_image(f)?;
    let (unit, sigma) = resolve_noise(
        &transform,
        &init.u_init,
        level,
        cfg.calibration_trials,
        cfg.calibration_seed,
    )?;
    let weights = init.mask.weights();
    let mut u = init.u_init.clone();
    for t in 0..cfg.iters {
        let profile = unit.rescaled(sigma * cfg.decay.powi(t as i32))?;
        let shrunk = act_shrink(&transform.forward(&u)?, &profile, cfg.ml_window)?;
        let mut next = transform.inverse(&shrunk)?.into_pixels();
        ndarray::Zip::from(&mut next)
            .and(f.pixels())
            .and(&weights)
            .for_each(|u, &fv, &m| *u += cfg.blend * m * (fv - *u));
        u = f.with_pixels(next)?;
    }
    Ok(ActOutput {
        image: u.clamped(),
        sigma,
        mask: init.mask,
        u_init: init.u_init,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::curvelet::band_energy;
    use crate::metrics::psnr;
    use crate::noise::{add_gaussian_noise, corrupt, NoiseSpec};
    use proptest::prelude::*;

    fn scene(n: usize) -> ImageBuffer {
        ImageBuffer::from_fn(n, n, |(r, c)| {
            let (x, y) = (c as f64, r as f64);
            let disk = if (x - 40.0).powi(2) + (y - 30.0).powi(2) < 300.0 { 60.0 } else { 0.0 };
            (90.0 + 40.0 * (x * 0.09).sin() * (y * 0.05).cos() + disk + 0.3 * y).clamp(10.0, 245.0)
        })
        .unwrap()
    }

    #[test]
    fn soft_shrink_definition() {
        assert_eq!(soft_shrink(5.0, 2.0), 3.0);
        assert_eq!(soft_shrink(-1.0, 2.0), 0.0);
        assert_eq!(soft_shrink(-7.5, 0.0), -7.5);
        let c = soft_shrink_complex(Complex64::new(3.0, 4.0), 2.5);
        assert!((c - Complex64::new(1.5, 2.0)).norm() < 1e-15);
        assert_eq!(soft_shrink_complex(Complex64::new(1.0, 1.0), f64::INFINITY), Complex64::default());
    }

    proptest! {
        #[test]
        fn soft_shrink_is_nonexpansive(y in -1e3f64..1e3, rho in 0.0f64..1e3) {
            prop_assert!(soft_shrink(y, rho).abs() <= y.abs());
        }

        #[test]
        fn soft_shrink_is_prox(y in -8.0f64..8.0, rho in 0.0f64..4.0) {
            let obj = |v: f64| 0.5 * (v - y).powi(2) + rho * v.abs();
            let s = soft_shrink(y, rho);
            for k in [-1e-3, 1e-3, 0.1, -0.1] {
                prop_assert!(obj(s) <= obj(s + k) + 1e-12);
            }
        }
    }

    #[test]
    fn local_mean_matches_direct_oracle() {
        let a = Array2::from_shape_fn((9, 13), |(r, c)| ((r * 5 + c * 11) % 17) as f64);
        let m = local_mean(&a, 5);
        for r in 0..9 {
            for c in 0..13 {
                let mut s = 0.0;
                for dr in -2isize..=2 {
                    for dc in -2isize..=2 {
                        let rr = (r as isize + dr).clamp(0, 8) as usize;
                        let cc = (c as isize + dc).clamp(0, 12) as usize;
                        s += a[[rr, cc]];
                    }
                }
                assert!((m[[r, c]] - s / 25.0).abs() < 1e-12);
            }
        }
        let whole = local_mean(&a, 11);
        assert!(whole.iter().all(|&v| (v - a.mean().unwrap()).abs() < 1e-12));
    }

    fn transform(n: usize) -> CurveletTransform {
        CurveletTransform::for_image(&ImageBuffer::filled(n, n, 0.0).unwrap()).unwrap()
    }

    #[test]
    fn variance_of_zero_and_constant_bands() {
        let t = transform(64);
        let zero = CurveletPyramid::zeros(t.geometry().clone());
        let p = SubbandNoiseProfile::zeros(t.geometry().clone());
        for v in estimate_signal_variance(&zero, &p, 7).unwrap() {
            assert!(v.iter().all(|&x| x == 0.0));
        }
        let mut constant = zero.clone();
        constant.bands_mut()[2].fill(Complex64::new(3.0, -1.0));
        let var = estimate_signal_variance(&constant, &p, 7).unwrap();
        assert!(var[2].iter().all(|&x| (x - 10.0).abs() < 1e-12));
    }

    #[test]
    fn variance_of_calibrated_noise_is_near_zero() {
        let t = transform(128);
        let unit = calibrate_noise(&t, 1.0, 20, 1).unwrap();
        let noise = add_gaussian_noise(&ImageBuffer::filled(128, 128, 0.0).unwrap(), 1.0, 9).unwrap();
        let pyr = t.forward(&noise).unwrap();
        let var = estimate_signal_variance(&pyr, &unit, 7).unwrap();
        let mut all: Vec<f64> = var.iter().skip(1).flat_map(|v| v.iter().copied()).collect();
        let mid = all.len() / 2;
        let median = *all.select_nth_unstable_by(mid, f64::total_cmp).1;
        assert!(median < 0.2, "{median}");
    }

    #[test]
    fn zero_profile_leaves_pyramid_unchanged() {
        let t = transform(64);
        let pyr = t.forward(&scene(64)).unwrap();
        let out = act_shrink(&pyr, &SubbandNoiseProfile::zeros(t.geometry().clone()), 7).unwrap();
        assert_eq!(out.to_vec(), pyr.to_vec());
    }

    #[test]
    fn pure_noise_is_mostly_removed() {
        let t = transform(128);
        let unit = calibrate_noise(&t, 1.0, 20, 1).unwrap();
        let profile = unit.rescaled(20.0).unwrap();
        let noise = add_gaussian_noise(&ImageBuffer::filled(128, 128, 0.0).unwrap(), 20.0, 2).unwrap();
        let pyr = t.forward(&noise).unwrap();
        let out = act_shrink(&pyr, &profile, 7).unwrap();
        let detail = t.geometry().detail_bands();
        let before: f64 = pyr.bands()[detail.clone()].iter().map(band_energy).sum();
        let after: f64 = out.bands()[detail].iter().map(band_energy).sum();
        assert!(after < 0.1 * before, "{after} / {before}");
    }

    #[test]
    fn shrinkage_never_grows_bands_and_is_monotone_in_noise() {
        let t = transform(64);
        let unit = calibrate_noise(&t, 1.0, 10, 1).unwrap();
        let noisy = add_gaussian_noise(&scene(64), 15.0, 3).unwrap();
        let pyr = t.forward(&noisy).unwrap();
        let a = act_shrink(&pyr, &unit.rescaled(10.0).unwrap(), 7).unwrap();
        let b = act_shrink(&pyr, &unit.rescaled(20.0).unwrap(), 7).unwrap();
        for ((x, y), z) in pyr.bands().iter().zip(a.bands()).zip(b.bands()) {
            assert!(band_energy(y) <= band_energy(x));
            for (ya, yb) in y.iter().zip(z) {
                assert!(yb.norm() <= ya.norm() + 1e-12);
            }
        }
        assert_eq!(a.bands()[0], pyr.bands()[0]);
    }

    #[test]
    fn one_pass_improves_median_init() {
        let clean = scene(128);
        let f = corrupt(&clean, &NoiseSpec::new(30.0, 0.3, 0.0, 4).unwrap()).unwrap();
        let init = detect(&f, NoiseKind::SaltPepper, &DetectorConfig::default()).unwrap();
        let cfg = ActConfig {
            iters: 1,
            ..ActConfig::default()
        };
        let out = act_denoise(&f, NoiseKind::SaltPepper, NoiseLevel::Declared(30.0), &cfg).unwrap();
        assert!(psnr(&clean, &out.image).unwrap() > psnr(&clean, &init.u_init).unwrap());
    }

    #[test]
    fn iterations_beat_init_on_mixed_noise() {
        let clean = scene(128);
        let f = corrupt(&clean, &NoiseSpec::new(30.0, 0.3, 0.0, 5).unwrap()).unwrap();
        let out = act_denoise(&f, NoiseKind::SaltPepper, NoiseLevel::Declared(30.0), &ActConfig::default())
            .unwrap();
        let init = psnr(&clean, &out.u_init).unwrap();
        let fin = psnr(&clean, &out.image).unwrap();
        assert!(fin > init + 2.0, "{init} -> {fin}");
    }

    #[test]
    fn near_identity_on_clean_input() {
        let clean = scene(64);
        let cfg = ActConfig {
            iters: 1,
            ..ActConfig::default()
        };
        let out = act_denoise(&clean, NoiseKind::SaltPepper, NoiseLevel::Declared(0.0), &cfg).unwrap();
        assert!(psnr(&clean, &out.image).unwrap() > 40.0);
    }

    #[test]
    fn auto_noise_level_is_plausible() {
        let clean = scene(128);
        let f = corrupt(&clean, &NoiseSpec::new(20.0, 0.1, 0.0, 6).unwrap()).unwrap();
        let cfg = ActConfig {
            iters: 1,
            ..ActConfig::default()
        };
        let out = act_denoise(&f, NoiseKind::SaltPepper, NoiseLevel::Auto, &cfg).unwrap();
        assert!(out.sigma > 12.0 && out.sigma < 28.0, "{}", out.sigma);
    }

    #[test]
    fn parse_noise_level() {
        assert_eq!("auto".parse::<NoiseLevel>().unwrap(), NoiseLevel::Auto);
        assert_eq!("20".parse::<NoiseLevel>().unwrap(), NoiseLevel::Declared(20.0));
        assert!("-1".parse::<NoiseLevel>().is_err());
        assert!(ActConfig { iters: 0, ..ActConfig::default() }.validate().is_err());
    }
}
