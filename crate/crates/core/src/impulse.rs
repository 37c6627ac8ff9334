//! Median-type impulse detectors.
//!
//! Both detectors return the pre-filtered image together with the mask that
//! marks pixels believed to be free of impulses (`true`). Flagged pixels are
//! the only ones the filters touch, so `u_init == f` wherever the mask is set.

use std::str::FromStr;

use ndarray::Array2;
use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::image::ImageBuffer;

/// Binary mask over an image; `true` = impulse-free.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct PixelMask {
    flags: Array2<bool>,
}

impl PixelMask {
    pub fn all_clean(width: usize, height: usize) -> Self {
        Self {
            flags: Array2::from_elem((height, width), true),
        }
    }

    pub fn from_flags(flags: Array2<bool>) -> Self {
        Self { flags }
    }

    pub fn width(&self) -> usize {
        self.flags.ncols()
    }

    pub fn height(&self) -> usize {
        self.flags.nrows()
    }

    pub fn dim(&self) -> (usize, usize) {
        self.flags.dim()
    }

    pub fn flags(&self) -> &Array2<bool> {
        &self.flags
    }

    pub fn is_clean(&self, row: usize, col: usize) -> bool {
        self.flags[[row, col]]
    }

    /// Fraction of pixels marked impulse-free.
    pub fn density(&self) -> f64 {
        self.flags.iter().filter(|&&b| b).count() as f64 / self.flags.len() as f64
    }

    /// Elementwise AND.
    pub fn and(&self, other: &PixelMask) -> Result<PixelMask> {
        if self.dim() != other.dim() {
            return Err(Error::DimensionMismatch {
                left: self.dim(),
                right: other.dim(),
            });
        }
        let mut flags = self.flags.clone();
        flags.zip_mut_with(&other.flags, |a, &b| *a = *a && b);
        Ok(Self { flags })
    }

    /// The mask as 0/1 weights.
    pub fn weights(&self) -> Array2<f64> {
        self.flags.mapv(|b| if b { 1.0 } else { 0.0 })
    }

    /// 0 for impulse candidates, 255 elsewhere; handy for dumping to PGM.
    pub fn to_image(&self) -> ImageBuffer {
        ImageBuffer::from_array(self.flags.mapv(|b| if b { 255.0 } else { 0.0 }))
            .expect("mask has the dimensions of a valid image")
    }
}

/// Which impulse species the observation is assumed to contain.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum NoiseKind {
    SaltPepper,
    RandomValued,
    SaltPepperRandomValued,
}

impl FromStr for NoiseKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "sp" => Ok(Self::SaltPepper),
            "rv" => Ok(Self::RandomValued),
            "sp+rv" | "sp_plus_rv" | "sp-rv" | "mixed" => Ok(Self::SaltPepperRandomValued),
            other => Err(Error::InvalidParameter(format!("unknown noise kind '{other}'"))),
        }
    }
}

impl std::fmt::Display for NoiseKind {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(match self {
            Self::SaltPepper => "sp",
            Self::RandomValued => "rv",
            Self::SaltPepperRandomValued => "sp+rv",
        })
    }
}

/// Thresholds `T_k = s * MAD + delta_k` for center weights `1, 3, 5, 7`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct AcwmfParams {
    pub deltas: [f64; 4],
    pub s: f64,
}

impl Default for AcwmfParams {
    fn default() -> Self {
        Self {
            deltas: [40.0, 25.0, 10.0, 5.0],
            s: 0.6,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DetectorConfig {
    pub amf_max_window: usize,
    pub acwmf: AcwmfParams,
}

impl Default for DetectorConfig {
    fn default() -> Self {
        Self {
            amf_max_window: 39,
            acwmf: AcwmfParams::default(),
        }
    }
}

#[derive(Debug, Clone)]
pub struct Detection {
    pub u_init: ImageBuffer,
    pub mask: PixelMask,
}

#[inline]
fn clamp_index(i: isize, n: usize) -> usize {
    i.clamp(0, n as isize - 1) as usize
}

/// Collects the `side x side` neighborhood around `(r, c)` with replicate padding.
fn gather(img: &Array2<f64>, r: usize, c: usize, side: usize, buf: &mut Vec<f64>) {
    let (h, w) = img.dim();
    let half = (side / 2) as isize;
    buf.clear();
    for dr in -half..=half {
        let rr = clamp_index(r as isize + dr, h);
        for dc in -half..=half {
            buf.push(img[[rr, clamp_index(c as isize + dc, w)]]);
        }
    }
}

fn median_in_place(buf: &mut [f64]) -> f64 {
    let mid = buf.len() / 2;
    *buf.select_nth_unstable_by(mid, f64::total_cmp).1
}

/// Adaptive median filter.
///
/// A pixel is an impulse candidate when it sits at `d_min` or `d_max`. For
/// each candidate the window grows from 3x3 until its median lies strictly
/// between the window minimum and maximum (or `max_window` is reached), and
/// the candidate is replaced by that median.
pub fn amf(f: &ImageBuffer, max_window: usize) -> Result<Detection> {
    if max_window < 3 || max_window.is_multiple_of(2) {
        return Err(Error::InvalidParameter(format!(
            "AMF window {max_window} must be odd and >= 3"
        )));
    }
    let range = f.range();
    let src = f.pixels();
    let (h, w) = src.dim();

    let rows: Vec<(Vec<f64>, Vec<bool>)> = (0..h)
        .into_par_iter()
        .map(|r| {
            let mut buf = Vec::with_capacity(max_window * max_window);
            let mut out = Vec::with_capacity(w);
            let mut clean = Vec::with_capacity(w);
            for c in 0..w {
                let v = src[[r, c]];
                if v != range.min && v != range.max {
                    out.push(v);
                    clean.push(true);
                    continue;
                }
                let mut side = 3;
                let replacement = loop {
                    gather(src, r, c, side, &mut buf);
                    let (lo, hi) = buf
                        .iter()
                        .fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), &x| {
                            (lo.min(x), hi.max(x))
                        });
                    let med = median_in_place(&mut buf);
                    if (lo < med && med < hi) || side >= max_window {
                        break med;
                    }
                    side += 2;
                };
                out.push(replacement);
                clean.push(false);
            }
            (out, clean)
        })
        .collect();

    let mut u = Array2::zeros((h, w));
    let mut flags = Array2::from_elem((h, w), true);
    for (r, (vals, clean)) in rows.into_iter().enumerate() {
        for c in 0..w {
            u[[r, c]] = vals[c];
            flags[[r, c]] = clean[c];
        }
    }
    Ok(Detection {
        u_init: f.with_pixels(u)?,
        mask: PixelMask::from_flags(flags),
    })
}

/// Adaptive center-weighted median filter on a 3x3 window.
///
/// For center weights `2k + 1`, `k = 0..4`, the differences
/// `d_k = |CWM_k - x|` are compared with `T_k = s * MAD + delta_k`; the pixel
/// is flagged when any of them exceeds its threshold and is then replaced by
/// the plain median.
pub fn acwmf(f: &ImageBuffer, params: &AcwmfParams) -> Result<Detection> {
    let (h, w) = f.dim();
    if h < 3 || w < 3 {
        return Err(Error::ImageTooSmall {
            width: w,
            height: h,
            min: 3,
        });
    }
    let src = f.pixels();
    let rows: Vec<(Vec<f64>, Vec<bool>)> = (0..h)
        .into_par_iter()
        .map(|r| {
            let mut window = Vec::with_capacity(9);
            let mut weighted = Vec::with_capacity(15);
            let mut out = Vec::with_capacity(w);
            let mut clean = Vec::with_capacity(w);
            for c in 0..w {
                let x = src[[r, c]];
                gather(src, r, c, 3, &mut window);
                let mut sorted = window.clone();
                sorted.sort_by(f64::total_cmp);
                let med = sorted[4];
                let mut dev: Vec<f64> = window.iter().map(|v| (v - med).abs()).collect();
                let mad = median_in_place(&mut dev);

                let mut flagged = false;
                for (k, delta) in params.deltas.iter().enumerate() {
                    // window[4] is the center; add 2k more copies of it.
                    weighted.clear();
                    weighted.extend_from_slice(&window);
                    weighted.extend(std::iter::repeat_n(x, 2 * k));
                    let cwm = median_in_place(&mut weighted);
                    if (cwm - x).abs() > params.s * mad + delta {
                        flagged = true;
                        break;
                    }
                }
                out.push(if flagged { med } else { x });
                clean.push(!flagged);
            }
            (out, clean)
        })
        .collect();

    let mut u = Array2::zeros((h, w));
    let mut flags = Array2::from_elem((h, w), true);
    for (r, (vals, clean)) in rows.into_iter().enumerate() {
        for c in 0..w {
            u[[r, c]] = vals[c];
            flags[[r, c]] = clean[c];
        }
    }
    Ok(Detection {
        u_init: f.with_pixels(u)?,
        mask: PixelMask::from_flags(flags),
    })
}

/// Dispatches to the detector matching the assumed impulse species. For mixed
/// SP + RV noise the AMF output is fed to ACWMF and the masks are ANDed.
pub fn detect(f: &ImageBuffer, kind: NoiseKind, cfg: &DetectorConfig) -> Result<Detection> {
    match kind {
        NoiseKind::SaltPepper => amf(f, cfg.amf_max_window),
        NoiseKind::RandomValued => acwmf(f, &cfg.acwmf),
        NoiseKind::SaltPepperRandomValued => {
            let first = amf(f, cfg.amf_max_window)?;
            let second = acwmf(&first.u_init, &cfg.acwmf)?;
            Ok(Detection {
                mask: first.mask.and(&second.mask)?,
                u_init: second.u_init,
            })
        }
    }
}
