//! Nonlocal group sparsity: block matching, the 3D group transform
//! `Psi_NLSM` and its aggregating inverse `Omega_NLSM`.

mod transform3d;

use std::io::Write;

use ndarray::Array2;
use rayon::prelude::*;

use crate::act::soft_shrink;
use crate::error::{Error, Result};
use crate::image::{DynamicRange, ImageBuffer};

pub use transform3d::{dct_matrix, haar_matrix, GroupTransform};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct PatchGeometry {
    /// Patch side `sqrt(B_p)`.
    pub patch: usize,
    /// Stride between reference patches.
    pub step: usize,
    /// Side of the search window for candidate top-left corners.
    pub window: usize,
    /// Patches per group `c`, the reference included.
    pub matches: usize,
}

impl Default for PatchGeometry {
    fn default() -> Self {
        Self {
            patch: 8,
            step: 4,
            window: 20,
            matches: 10,
        }
    }
}

impl PatchGeometry {
    pub fn validate(&self, width: usize, height: usize) -> Result<()> {
        let bad = |msg: String| Err(Error::InvalidParameter(msg));
        if self.patch == 0 || self.step == 0 || self.matches == 0 {
            return bad(format!("{self:?}: patch, step and matches must be positive"));
        }
        if self.step > self.patch {
            return bad(format!("step {} exceeds patch {}", self.step, self.patch));
        }
        if self.patch > self.window {
            return bad(format!("patch {} exceeds window {}", self.patch, self.window));
        }
        if self.window > width.min(height) {
            return bad(format!("window {} exceeds image side {}", self.window, width.min(height)));
        }
        // Smallest candidate set occurs in a corner.
        let corner = self.window - self.window / 2;
        if corner * corner < self.matches {
            return bad(format!(
                "window {} cannot supply {} matches at the border",
                self.window, self.matches
            ));
        }
        Ok(())
    }

    /// Coefficients per group, `B_p * c`.
    pub fn group_len(&self) -> usize {
        self.patch * self.patch * self.matches
    }
}

/// Reference offsets along one axis: every `step`, plus the last position.
pub fn reference_positions(len: usize, patch: usize, step: usize) -> Vec<usize> {
    let last = len - patch;
    let mut v: Vec<usize> = (0..=last).step_by(step).collect();
    if *v.last().expect("nonempty") != last {
        v.push(last);
    }
    v
}

/// Top-left corners of the patches in one group; the reference comes first.
#[derive(Debug, Clone, PartialEq)]
pub struct MatchSet {
    pub members: Vec<(usize, usize)>,
    pub distances: Vec<f64>,
}

impl MatchSet {
    pub fn reference(&self) -> (usize, usize) {
        self.members[0]
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct MatchSets {
    pub height: usize,
    pub width: usize,
    pub range: DynamicRange,
    pub geometry: PatchGeometry,
    pub sets: Vec<MatchSet>,
}

impl MatchSets {
    /// `K_Theta = B_p * c * P`.
    pub fn coefficient_count(&self) -> usize {
        self.geometry.group_len() * self.sets.len()
    }

    pub fn len(&self) -> usize {
        self.sets.len()
    }

    pub fn is_empty(&self) -> bool {
        self.sets.is_empty()
    }

    pub fn validate(&self) -> Result<()> {
        let g = &self.geometry;
        if self.height < g.patch || self.width < g.patch {
            return Err(Error::InconsistentMatches("image smaller than a patch".into()));
        }
        for (i, set) in self.sets.iter().enumerate() {
            if set.members.len() != g.matches {
                return Err(Error::InconsistentMatches(format!(
                    "group {i} has {} members, expected {}",
                    set.members.len(),
                    g.matches
                )));
            }
            if set
                .members
                .iter()
                .any(|&(r, c)| r + g.patch > self.height || c + g.patch > self.width)
            {
                return Err(Error::InconsistentMatches(format!("group {i} leaves the image")));
            }
        }
        Ok(())
    }

    /// One CSV line per member: `group,rank,row,col,distance`.
    pub fn write_csv(&self, mut out: impl Write) -> std::io::Result<()> {
        writeln!(out, "group,rank,row,col,distance")?;
        for (g, set) in self.sets.iter().enumerate() {
            for (rank, (&(r, c), d)) in set.members.iter().zip(&set.distances).enumerate() {
                writeln!(out, "{g},{rank},{r},{c},{d}")?;
            }
        }
        Ok(())
    }
}

fn patch_distance(px: &Array2<f64>, a: (usize, usize), b: (usize, usize), p: usize, bound: f64) -> f64 {
    let mut d = 0.0;
    for i in 0..p {
        let ra = px.row(a.0 + i);
        let rb = px.row(b.0 + i);
        for j in 0..p {
            let e = ra[a.1 + j] - rb[b.1 + j];
            d += e * e;
        }
        if d > bound {
            return d;
        }
    }
    d
}

/// Candidate top-left range along one axis around `center`.
fn search_range(center: usize, window: usize, limit: usize) -> std::ops::RangeInclusive<usize> {
    let lo = center.saturating_sub(window / 2);
    let hi = (center + window - window / 2 - 1).min(limit);
    lo..=hi
}

/// Groups of the `c` most similar patches around every reference patch.
///
/// The reference itself is always the first member. The other `c - 1` are
/// the candidates in the window with the smallest squared distance to it,
/// ties broken by raster order.
pub fn block_match(img: &ImageBuffer, geom: &PatchGeometry) -> Result<MatchSets> {
    let (h, w) = img.dim();
    geom.validate(w, h)?;
    let p = geom.patch;
    let rows = reference_positions(h, p, geom.step);
    let cols = reference_positions(w, p, geom.step);
    let refs: Vec<(usize, usize)> = rows
        .iter()
        .flat_map(|&r| cols.iter().map(move |&c| (r, c)))
        .collect();
    let px = img.pixels();
    let sets = refs
        .par_iter()
        .map(|&reference| {
            let need = geom.matches - 1;
            let mut best: Vec<(f64, usize, usize)> = Vec::with_capacity(need + 1);
            for r in search_range(reference.0, geom.window, h - p) {
                for c in search_range(reference.1, geom.window, w - p) {
                    if (r, c) == reference || need == 0 {
                        continue;
                    }
                    let bound = if best.len() == need { best[need - 1].0 } else { f64::INFINITY };
                    let d = patch_distance(px, reference, (r, c), p, bound);
                    // Raster order of visiting makes `<` the tie-break.
                    if best.len() == need && d >= bound {
                        continue;
                    }
                    let pos = best.partition_point(|e| e.0 <= d);
                    best.insert(pos, (d, r, c));
                    best.truncate(need);
                }
            }
            let mut members = vec![reference];
            let mut distances = vec![0.0];
            for (d, r, c) in best {
                members.push((r, c));
                distances.push(d);
            }
            MatchSet { members, distances }
        })
        .collect::<Vec<_>>();
    let out = MatchSets {
        height: h,
        width: w,
        range: img.range(),
        geometry: *geom,
        sets,
    };
    out.validate()?;
    Ok(out)
}

fn extract(px: &Array2<f64>, set: &MatchSet, p: usize) -> Vec<f64> {
    let mut stack = Vec::with_capacity(p * p * set.members.len());
    for &(r, c) in &set.members {
        for i in 0..p {
            stack.extend(px.row(r + i).iter().skip(c).take(p));
        }
    }
    stack
}

/// `Theta` for an image and precomputed match sets, concatenated group by
/// group in reference raster order.
pub fn nlsm_coefficients(img: &ImageBuffer, sets: &MatchSets) -> Result<Vec<f64>> {
    sets.validate()?;
    img.check_shape((sets.height, sets.width))?;
    let g = &sets.geometry;
    let t = GroupTransform::new(g.patch, g.matches);
    let px = img.pixels();
    let groups: Vec<Vec<f64>> = sets
        .sets
        .par_iter()
        .map(|set| t.forward(&extract(px, set, g.patch)))
        .collect();
    Ok(groups.concat())
}

/// Block matching followed by the group transform.
pub fn nlsm_forward(img: &ImageBuffer, geom: &PatchGeometry) -> Result<(Vec<f64>, MatchSets)> {
    let sets = block_match(img, geom)?;
    let theta = nlsm_coefficients(img, &sets)?;
    Ok((theta, sets))
}

/// `sum |Theta|`.
pub fn nlsm_prior(theta: &[f64]) -> f64 {
    theta.iter().map(|v| v.abs()).sum()
}

/// Soft-shrinks `theta`, inverts every group and averages the overlapping
/// patch estimates pixel by pixel.
pub fn nlsm_shrink_inverse(theta: &[f64], sets: &MatchSets, threshold: f64) -> Result<ImageBuffer> {
    sets.validate()?;
    if threshold.is_nan() || threshold < 0.0 {
        return Err(Error::InvalidParameter(format!("threshold {threshold}")));
    }
    if theta.len() != sets.coefficient_count() {
        return Err(Error::InconsistentMatches(format!(
            "{} coefficients for {} groups of {}",
            theta.len(),
            sets.len(),
            sets.geometry.group_len()
        )));
    }
    let g = &sets.geometry;
    let p = g.patch;
    let t = GroupTransform::new(p, g.matches);
    let estimates: Vec<Vec<f64>> = theta
        .par_chunks(g.group_len())
        .map(|coeffs| {
            let shrunk: Vec<f64> = coeffs.iter().map(|&v| soft_shrink(v, threshold)).collect();
            t.inverse(&shrunk)
        })
        .collect();

    let mut sum = Array2::<f64>::zeros((sets.height, sets.width));
    let mut count = Array2::<f64>::zeros((sets.height, sets.width));
    for (set, est) in sets.sets.iter().zip(&estimates) {
        for (m, &(r, c)) in set.members.iter().enumerate() {
            let patch = &est[m * p * p..(m + 1) * p * p];
            for i in 0..p {
                for j in 0..p {
                    sum[[r + i, c + j]] += patch[i * p + j];
                    count[[r + i, c + j]] += 1.0;
                }
            }
        }
    }
    if count.iter().any(|&n| n == 0.0) {
        return Err(Error::InconsistentMatches("some pixels are covered by no patch".into()));
    }
    sum.zip_mut_with(&count, |s, &n| *s /= n);
    ImageBuffer::new(sum, sets.range)
}
