//! Frequency tiling of the wrapping curvelet transform.
//!
//! The DFT plane is cut into concentric-square coronae by Meyer low-pass
//! windows `Phi_b(y, x) = phi(y * a_b) * phi(x * a_b)`, with
//! `a_b = 3 * 2^(J - 1 - b)` in normalized frequency, so that
//!
//! ```text
//! scale 0        : Phi_0
//! scale 1..J-2   : sqrt(Phi_j^2 - Phi_{j-1}^2)   (split into wedges)
//! scale J-1      : sqrt(1 - Phi_{J-2}^2)         (isotropic, or wedges)
//! ```
//!
//! Each corona is split into wedges by a Meyer partition of unity in the
//! pseudo-angle (position along the unit square), so squared windows sum to
//! one everywhere. A wedge's samples are wrapped (periodized) onto a
//! rectangle chosen so that no two samples of the wedge collide, which
//! makes forward-then-adjoint the identity.

use crate::error::{Error, Result};

use super::window::{lowpass_profile, pseudo_angle, transition};

/// What the finest scale holds.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum FinestLevel {
    /// A single isotropic high-pass band.
    Wavelets,
    /// Angular wedges, like the other detail scales.
    Curvelets,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct CurveletParams {
    /// Number of scales `J`, counting the coarse low-pass and the finest band.
    pub scales: usize,
    /// Wedges at the coarsest detail scale; doubled every other scale outwards.
    pub coarse_angles: usize,
    pub finest: FinestLevel,
}

impl CurveletParams {
    /// `ceil(log2(min side)) - 3` scales, 16 coarse angles, wavelets at the finest scale.
    pub fn for_size(width: usize, height: usize) -> Self {
        Self {
            scales: default_scales(width, height),
            coarse_angles: 16,
            finest: FinestLevel::Wavelets,
        }
    }

    pub fn with_scales(self, scales: usize) -> Self {
        Self { scales, ..self }
    }
}

pub fn default_scales(width: usize, height: usize) -> usize {
    let side = width.min(height).max(1);
    let log2 = usize::BITS - (side - 1).leading_zeros();
    (log2 as usize).saturating_sub(3)
}

/// Minimum image side accepted by the transform.
pub const MIN_TRANSFORM_SIDE: usize = 32;

/// One frequency sample of a subband window.
#[derive(Debug, Clone, Copy)]
pub(crate) struct Tap {
    /// Row-major index into the full `height x width` DFT grid.
    pub freq: usize,
    /// Row-major index into the subband rectangle.
    pub wrapped: usize,
    pub weight: f64,
}

#[derive(Debug, Clone)]
pub struct Subband {
    pub scale: usize,
    pub orientation: usize,
    pub rows: usize,
    pub cols: usize,
    pub(crate) taps: Vec<Tap>,
}

impl Subband {
    pub fn len(&self) -> usize {
        self.rows * self.cols
    }

    pub fn is_empty(&self) -> bool {
        self.taps.is_empty()
    }

    /// Sum of squared window weights.
    pub fn window_energy(&self) -> f64 {
        self.taps.iter().map(|t| t.weight * t.weight).sum()
    }
}

#[derive(Debug)]
pub struct CurveletGeometry {
    height: usize,
    width: usize,
    params: CurveletParams,
    subbands: Vec<Subband>,
    /// Index of the first subband of each scale, plus a final sentinel.
    scale_starts: Vec<usize>,
}

impl PartialEq for CurveletGeometry {
    fn eq(&self, other: &Self) -> bool {
        self.height == other.height && self.width == other.width && self.params == other.params
    }
}

/// Signed frequency of DFT index `k` on a grid of `n` samples.
fn signed_freq(k: usize, n: usize) -> isize {
    if k <= (n - 1) / 2 {
        k as isize
    } else {
        k as isize - n as isize
    }
}

/// Wedges at detail scale `j` (1-based from the first detail scale).
pub fn angles_at(coarse_angles: usize, detail_index: usize) -> usize {
    coarse_angles << detail_index.saturating_sub(1).div_ceil(2)
}

/// Frequency row, column, flat index into the full grid, and window value.
type Sample = (isize, isize, usize, f64);

enum Layout {
    /// Bounding box in both directions.
    Box,
    /// Radial direction along columns: rows wrap by the widest column span.
    ColumnMajor,
    /// Radial direction along rows.
    RowMajor,
}

impl CurveletGeometry {
    pub fn new(width: usize, height: usize, params: CurveletParams) -> Result<Self> {
        if width < MIN_TRANSFORM_SIDE || height < MIN_TRANSFORM_SIDE {
            return Err(Error::ImageTooSmall {
                width,
                height,
                min: MIN_TRANSFORM_SIDE,
            });
        }
        let j_total = params.scales;
        if j_total < 2 {
            return Err(Error::InvalidParameter(format!(
                "need at least 2 scales, got {j_total}"
            )));
        }
        if params.coarse_angles < 4 || !params.coarse_angles.is_multiple_of(4) {
            return Err(Error::InvalidParameter(format!(
                "coarse angle count {} must be a positive multiple of 4",
                params.coarse_angles
            )));
        }
        // Coarsest low-pass half-width in samples along the shorter side.
        let coarse_halfwidth = width.min(height) as f64 / 3.0 / 2f64.powi(j_total as i32 - 1);
        if coarse_halfwidth < 1.0 {
            return Err(Error::InvalidParameter(format!(
                "{j_total} scales is too many for a {width}x{height} image"
            )));
        }

        let lowpass = |b: usize, y: f64, x: f64| -> f64 {
            let a = 3.0 * 2f64.powi((j_total - 1 - b) as i32);
            lowpass_profile(y * a) * lowpass_profile(x * a)
        };

        let mut subbands = Vec::new();
        let mut scale_starts = Vec::with_capacity(j_total + 1);
        for scale in 0..j_total {
            scale_starts.push(subbands.len());
            let finest = scale == j_total - 1;
            let angular = scale > 0 && (!finest || params.finest == FinestLevel::Curvelets);
            let n_angles = if angular {
                angles_at(params.coarse_angles, scale)
            } else {
                1
            };
            let mut taps: Vec<Vec<Sample>> = vec![Vec::new(); n_angles];
            for kr in 0..height {
                let fr = signed_freq(kr, height);
                let y = fr as f64 / height as f64;
                for kc in 0..width {
                    let fc = signed_freq(kc, width);
                    let x = fc as f64 / width as f64;
                    let radial = if scale == 0 {
                        lowpass(0, y, x)
                    } else if finest {
                        let p = lowpass(scale - 1, y, x);
                        (1.0 - p * p).max(0.0).sqrt()
                    } else {
                        let outer = lowpass(scale, y, x);
                        let inner = lowpass(scale - 1, y, x);
                        (outer * outer - inner * inner).max(0.0).sqrt()
                    };
                    if radial <= 0.0 {
                        continue;
                    }
                    let freq = kr * width + kc;
                    if !angular {
                        taps[0].push((fr, fc, freq, radial));
                        continue;
                    }
                    let delta = 8.0 / n_angles as f64;
                    let s = pseudo_angle(x, y);
                    let pos = (s + 0.5 * delta) / delta;
                    let rising = pos.floor() as usize % n_angles;
                    let (rise, fall) = transition(pos.fract());
                    let falling = (rising + n_angles - 1) % n_angles;
                    if rise > 0.0 {
                        taps[rising].push((fr, fc, freq, radial * rise));
                    }
                    if fall > 0.0 {
                        taps[falling].push((fr, fc, freq, radial * fall));
                    }
                }
            }
            for (orientation, wedge) in taps.into_iter().enumerate() {
                let layout = if !angular {
                    Layout::Box
                } else {
                    let delta = 8.0 / n_angles as f64;
                    let center = (orientation as f64 + 0.5) * delta;
                    let horizontal = !(1.0..3.0).contains(&center) && !(5.0..7.0).contains(&center);
                    if horizontal {
                        Layout::ColumnMajor
                    } else {
                        Layout::RowMajor
                    }
                };
                subbands.push(Self::wrap_subband(scale, orientation, wedge, layout)?);
            }
        }
        scale_starts.push(subbands.len());

        Ok(Self {
            height,
            width,
            params,
            subbands,
            scale_starts,
        })
    }

    fn wrap_subband(
        scale: usize,
        orientation: usize,
        samples: Vec<Sample>,
        layout: Layout,
    ) -> Result<Subband> {
        if samples.is_empty() {
            return Err(Error::InvalidParameter(format!(
                "subband ({scale}, {orientation}) has an empty frequency support"
            )));
        }
        let extent = |vals: &mut dyn Iterator<Item = isize>| -> (isize, isize) {
            vals.fold((isize::MAX, isize::MIN), |(lo, hi), v| (lo.min(v), hi.max(v)))
        };
        let (r_lo, r_hi) = extent(&mut samples.iter().map(|s| s.0));
        let (c_lo, c_hi) = extent(&mut samples.iter().map(|s| s.1));
        let widest_span = |key: fn(&Sample) -> (isize, isize)| -> isize {
            let mut spans: std::collections::BTreeMap<isize, (isize, isize)> = Default::default();
            for s in &samples {
                let (line, v) = key(s);
                let e = spans.entry(line).or_insert((v, v));
                e.0 = e.0.min(v);
                e.1 = e.1.max(v);
            }
            spans.values().map(|(lo, hi)| hi - lo + 1).max().unwrap_or(1)
        };
        let (rows, cols) = match layout {
            Layout::Box => (r_hi - r_lo + 1, c_hi - c_lo + 1),
            Layout::ColumnMajor => (widest_span(|s| (s.1, s.0)), c_hi - c_lo + 1),
            Layout::RowMajor => (r_hi - r_lo + 1, widest_span(|s| (s.0, s.1))),
        };
        let (rows, cols) = (rows as usize, cols as usize);
        let mut taps = Vec::with_capacity(samples.len());
        let mut used = vec![false; rows * cols];
        for (fr, fc, freq, weight) in samples {
            let wr = fr.rem_euclid(rows as isize) as usize;
            let wc = fc.rem_euclid(cols as isize) as usize;
            let wrapped = wr * cols + wc;
            if std::mem::replace(&mut used[wrapped], true) {
                unreachable!("wrapping collision in subband ({scale}, {orientation})");
            }
            taps.push(Tap {
                freq,
                wrapped,
                weight,
            });
        }
        Ok(Subband {
            scale,
            orientation,
            rows,
            cols,
            taps,
        })
    }

    pub fn width(&self) -> usize {
        self.width
    }

    pub fn height(&self) -> usize {
        self.height
    }

    pub fn params(&self) -> &CurveletParams {
        &self.params
    }

    pub fn scales(&self) -> usize {
        self.params.scales
    }

    pub fn subbands(&self) -> &[Subband] {
        &self.subbands
    }

    pub fn subband_count(&self) -> usize {
        self.subbands.len()
    }

    /// Flat subband index of `(scale, orientation)`.
    pub fn index_of(&self, scale: usize, orientation: usize) -> Option<usize> {
        let start = *self.scale_starts.get(scale)?;
        let end = self.scale_starts[scale + 1];
        (start + orientation < end).then_some(start + orientation)
    }

    /// Subband indices belonging to `scale`.
    pub fn scale_range(&self, scale: usize) -> std::ops::Range<usize> {
        self.scale_starts[scale]..self.scale_starts[scale + 1]
    }

    pub fn orientations(&self, scale: usize) -> usize {
        self.scale_range(scale).len()
    }

    /// Total number of coefficients.
    pub fn coefficient_count(&self) -> usize {
        self.subbands.iter().map(Subband::len).sum()
    }

    /// Subband indices of every detail band (everything but the coarse low-pass).
    pub fn detail_bands(&self) -> std::ops::Range<usize> {
        self.scale_starts[1]..self.subbands.len()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn default_scale_counts() {
        assert_eq!(default_scales(256, 256), 5);
        assert_eq!(default_scales(64, 64), 3);
        assert_eq!(default_scales(100, 64), 3);
        assert_eq!(default_scales(32, 32), 2);
    }

    #[test]
    fn angle_schedule_doubles_every_other_scale() {
        let counts: Vec<usize> = (1..=5).map(|j| angles_at(16, j)).collect();
        assert_eq!(counts, vec![16, 32, 32, 64, 64]);
    }

    #[test]
    fn squared_windows_partition_unity() {
        for (w, h, finest) in [
            (64, 64, FinestLevel::Wavelets),
            (48, 40, FinestLevel::Curvelets),
        ] {
            let params = CurveletParams {
                finest,
                ..CurveletParams::for_size(w, h)
            };
            let g = CurveletGeometry::new(w, h, params).unwrap();
            let mut total = vec![0.0; w * h];
            for band in g.subbands() {
                for t in &band.taps {
                    total[t.freq] += t.weight * t.weight;
                }
            }
            for v in total {
                assert!((v - 1.0).abs() < 1e-13, "{v}");
            }
        }
    }

    #[test]
    fn layout_for_256() {
        let g = CurveletGeometry::new(256, 256, CurveletParams::for_size(256, 256)).unwrap();
        assert_eq!(g.scales(), 5);
        let per_scale: Vec<usize> = (0..5).map(|j| g.orientations(j)).collect();
        assert_eq!(per_scale, vec![1, 16, 32, 32, 1]);
        let coarse = &g.subbands()[0];
        assert_eq!((coarse.rows, coarse.cols), (21, 21));
        let finest = g.subbands().last().unwrap();
        assert_eq!((finest.rows, finest.cols), (256, 256));
        assert_eq!(g.index_of(2, 5), Some(1 + 16 + 5));
        assert_eq!(g.index_of(1, 16), None);
    }

    #[test]
    fn rejects_bad_parameters() {
        assert!(CurveletGeometry::new(16, 64, CurveletParams::for_size(64, 64)).is_err());
        let p = CurveletParams::for_size(64, 64);
        assert!(CurveletGeometry::new(64, 64, p.with_scales(1)).is_err());
        assert!(CurveletGeometry::new(64, 64, p.with_scales(9)).is_err());
        let odd = CurveletParams {
            coarse_angles: 6,
            ..p
        };
        assert!(CurveletGeometry::new(64, 64, odd).is_err());
    }
}
