//! PSNR and SSIM.
//!
//! SSIM follows the usual reference setup: 11x11 Gaussian window with
//! sigma 1.5, `K1 = 0.01`, `K2 = 0.03`, `L = d_max - d_min`, statistics taken
//! only where the window fits entirely inside the image, then averaged.

use ndarray::Array2;

use crate::error::{Error, Result};
use crate::image::ImageBuffer;

pub const SSIM_WINDOW: usize = 11;
const SSIM_SIGMA: f64 = 1.5;
const SSIM_K1: f64 = 0.01;
const SSIM_K2: f64 = 0.03;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct QualityScore {
    pub psnr_db: f64,
    pub ssim: f64,
}

impl QualityScore {
    pub fn measure(reference: &ImageBuffer, test: &ImageBuffer) -> Result<Self> {
        Ok(Self {
            psnr_db: psnr(reference, test)?,
            ssim: ssim(reference, test)?,
        })
    }
}

pub fn mse(a: &ImageBuffer, b: &ImageBuffer) -> Result<f64> {
    a.check_same_dims(b)?;
    let sum: f64 = a
        .pixels()
        .iter()
        .zip(b.pixels())
        .map(|(x, y)| (x - y) * (x - y))
        .sum();
    Ok(sum / a.len() as f64)
}

/// `10 log10(d_max^2 / MSE)` with the peak taken from `a`'s range.
/// Identical inputs give `f64::INFINITY`.
pub fn psnr(a: &ImageBuffer, b: &ImageBuffer) -> Result<f64> {
    let mse = mse(a, b)?;
    if mse == 0.0 {
        return Ok(f64::INFINITY);
    }
    let peak = a.range().max;
    Ok(10.0 * (peak * peak / mse).log10())
}

fn gaussian_kernel() -> [f64; SSIM_WINDOW] {
    let mut k = [0.0; SSIM_WINDOW];
    let half = (SSIM_WINDOW / 2) as f64;
    for (i, v) in k.iter_mut().enumerate() {
        let x = i as f64 - half;
        *v = (-x * x / (2.0 * SSIM_SIGMA * SSIM_SIGMA)).exp();
    }
    let s: f64 = k.iter().sum();
    k.iter_mut().for_each(|v| *v /= s);
    k
}

/// Separable "valid" filtering with the SSIM window.
fn filter_valid(img: &Array2<f64>, k: &[f64; SSIM_WINDOW]) -> Array2<f64> {
    let (h, w) = img.dim();
    let ow = w + 1 - SSIM_WINDOW;
    let oh = h + 1 - SSIM_WINDOW;
    let mut tmp = Array2::<f64>::zeros((h, ow));
    for r in 0..h {
        for c in 0..ow {
            tmp[[r, c]] = (0..SSIM_WINDOW).map(|i| k[i] * img[[r, c + i]]).sum();
        }
    }
    let mut out = Array2::<f64>::zeros((oh, ow));
    for r in 0..oh {
        for c in 0..ow {
            out[[r, c]] = (0..SSIM_WINDOW).map(|i| k[i] * tmp[[r + i, c]]).sum();
        }
    }
    out
}

/// Mean structural similarity.
pub fn ssim(a: &ImageBuffer, b: &ImageBuffer) -> Result<f64> {
    a.check_same_dims(b)?;
    if a.width() < SSIM_WINDOW || a.height() < SSIM_WINDOW {
        return Err(Error::ImageTooSmall {
            width: a.width(),
            height: a.height(),
            min: SSIM_WINDOW,
        });
    }
    if a.pixels() == b.pixels() {
        return Ok(1.0);
    }
    let l = a.range().span();
    let c1 = (SSIM_K1 * l).powi(2);
    let c2 = (SSIM_K2 * l).powi(2);
    let k = gaussian_kernel();
    let x = a.pixels();
    let y = b.pixels();
    let mu_x = filter_valid(x, &k);
    let mu_y = filter_valid(y, &k);
    let xx = filter_valid(&(x * x), &k);
    let yy = filter_valid(&(y * y), &k);
    let xy = filter_valid(&(x * y), &k);

    let mut total = 0.0;
    for i in 0..mu_x.len() {
        let (mx, my) = (mu_x.as_slice().unwrap()[i], mu_y.as_slice().unwrap()[i]);
        let sxx = xx.as_slice().unwrap()[i] - mx * mx;
        let syy = yy.as_slice().unwrap()[i] - my * my;
        let sxy = xy.as_slice().unwrap()[i] - mx * my;
        total += ((2.0 * mx * my + c1) * (2.0 * sxy + c2))
            / ((mx * mx + my * my + c1) * (sxx + syy + c2));
    }
    Ok(total / mu_x.len() as f64)
}
