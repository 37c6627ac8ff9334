//! Mixed Gaussian plus impulse degradation.
//!
//! The observation is `f = N_imp(u + eta)`: white Gaussian noise is added
//! first, then a random subset of pixels is overwritten by impulses. Each
//! pixel draws one uniform number `p`; `p < r_sp` makes it salt-and-pepper,
//! `r_sp <= p < r_sp + r_rv` makes it random-valued, anything else leaves it
//! alone.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Normal};

use crate::error::{Error, Result};
use crate::image::ImageBuffer;

/// Stream used for impulse draws so they never share bits with the Gaussian draws.
const IMPULSE_STREAM: u64 = 1;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct NoiseSpec {
    /// AWGN standard deviation, intensity units.
    pub sigma: f64,
    /// Salt-and-pepper ratio.
    pub r_sp: f64,
    /// Random-valued impulse ratio.
    pub r_rv: f64,
    pub seed: u64,
}

impl NoiseSpec {
    pub fn new(sigma: f64, r_sp: f64, r_rv: f64, seed: u64) -> Result<Self> {
        let spec = Self {
            sigma,
            r_sp,
            r_rv,
            seed,
        };
        spec.validate()?;
        Ok(spec)
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.sigma.is_finite() && self.sigma >= 0.0) {
            return Err(Error::InvalidNoise(format!("sigma {} must be >= 0", self.sigma)));
        }
        for (name, r) in [("r_sp", self.r_sp), ("r_rv", self.r_rv)] {
            if !(0.0..=1.0).contains(&r) {
                return Err(Error::InvalidNoise(format!("{name} = {r} outside [0, 1]")));
            }
        }
        if self.r_sp + self.r_rv > 1.0 {
            return Err(Error::InvalidNoise(format!(
                "r_sp + r_rv = {} exceeds 1",
                self.r_sp + self.r_rv
            )));
        }
        Ok(())
    }

    pub fn with_seed(self, seed: u64) -> Self {
        Self { seed, ..self }
    }
}

/// What happened to a pixel during impulse corruption.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Impulse {
    None,
    SaltPepper,
    RandomValued,
}

/// Returns `img + eta`, `eta ~ N(0, sigma^2)` i.i.d., unclamped.
pub fn add_gaussian_noise(img: &ImageBuffer, sigma: f64, seed: u64) -> Result<ImageBuffer> {
    if !(sigma.is_finite() && sigma >= 0.0) {
        return Err(Error::InvalidNoise(format!("sigma {sigma} must be >= 0")));
    }
    if sigma == 0.0 {
        return Ok(img.clone());
    }
    let normal = Normal::new(0.0, sigma).expect("sigma validated");
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut out = img.clone();
    for v in out.pixels_mut().iter_mut() {
        *v += normal.sample(&mut rng);
    }
    Ok(out)
}

/// Impulse corruption; also reports which pixels were hit and how.
pub fn add_impulse_noise_tracked(
    img: &ImageBuffer,
    spec: &NoiseSpec,
) -> Result<(ImageBuffer, Vec<Impulse>)> {
    spec.validate()?;
    let range = img.range();
    let mut rng = ChaCha8Rng::seed_from_u64(spec.seed);
    rng.set_stream(IMPULSE_STREAM);
    let mut out = img.clone();
    let mut sites = Vec::with_capacity(img.len());
    for v in out.pixels_mut().iter_mut() {
        // Draw a fixed number of values per pixel so the stream stays aligned
        // across different ratios.
        let p: f64 = rng.random();
        let coin: bool = rng.random();
        let level: f64 = rng.random();
        if p < spec.r_sp {
            *v = if coin { range.max } else { range.min };
            sites.push(Impulse::SaltPepper);
        } else if p < spec.r_sp + spec.r_rv {
            *v = range.min + level * range.span();
            sites.push(Impulse::RandomValued);
        } else {
            sites.push(Impulse::None);
        }
    }
    Ok((out, sites))
}

pub fn add_impulse_noise(img: &ImageBuffer, spec: &NoiseSpec) -> Result<ImageBuffer> {
    add_impulse_noise_tracked(img, spec).map(|(img, _)| img)
}

/// `f = N_imp(u + eta)`, clamped to the dynamic range.
pub fn corrupt(img: &ImageBuffer, spec: &NoiseSpec) -> Result<ImageBuffer> {
    corrupt_tracked(img, spec).map(|(img, _)| img)
}

pub fn corrupt_tracked(img: &ImageBuffer, spec: &NoiseSpec) -> Result<(ImageBuffer, Vec<Impulse>)> {
    spec.validate()?;
    let noisy = add_gaussian_noise(img, spec.sigma, spec.seed)?;
    let (out, sites) = add_impulse_noise_tracked(&noisy, spec)?;
    Ok((out.clamped(), sites))
}
