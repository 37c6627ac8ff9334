//! Binary pyramid container.
//!
//! ```text
//! magic        8 bytes  "DJCURVE1"
//! height       u64
//! width        u64
//! scales       u64
//! coarse       u64      wedges at the coarsest detail scale
//! finest       u64      0 = wavelets, 1 = curvelets
//! range        2 x f64  d_min, d_max
//! bands        u64
//! shape table  bands x (u64 rows, u64 cols)
//! payload      re, im pairs as f64, band by band, row-major
//! ```
//!
//! All integers and floats are little-endian.

use std::path::Path;
use std::sync::Arc;

use ndarray::Array2;
use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::image::DynamicRange;

use super::{CurveletGeometry, CurveletParams, CurveletPyramid, FinestLevel};

const MAGIC: &[u8; 8] = b"DJCURVE1";

pub fn encode_pyramid(pyr: &CurveletPyramid) -> Vec<u8> {
    let g = pyr.geometry();
    let p = g.params();
    let mut out = Vec::with_capacity(64 + 16 * g.coefficient_count());
    out.extend_from_slice(MAGIC);
    let finest = match p.finest {
        FinestLevel::Wavelets => 0u64,
        FinestLevel::Curvelets => 1,
    };
    for v in [g.height(), g.width(), p.scales, p.coarse_angles] {
        out.extend_from_slice(&(v as u64).to_le_bytes());
    }
    out.extend_from_slice(&finest.to_le_bytes());
    out.extend_from_slice(&pyr.range().min.to_le_bytes());
    out.extend_from_slice(&pyr.range().max.to_le_bytes());
    out.extend_from_slice(&(pyr.bands().len() as u64).to_le_bytes());
    for b in pyr.bands() {
        out.extend_from_slice(&(b.nrows() as u64).to_le_bytes());
        out.extend_from_slice(&(b.ncols() as u64).to_le_bytes());
    }
    for b in pyr.bands() {
        for c in b.iter() {
            out.extend_from_slice(&c.re.to_le_bytes());
            out.extend_from_slice(&c.im.to_le_bytes());
        }
    }
    out
}

struct Reader<'a> {
    data: &'a [u8],
}

impl Reader<'_> {
    fn take8(&mut self) -> Result<[u8; 8]> {
        if self.data.len() < 8 {
            return Err(Error::Format("truncated".into()));
        }
        let (head, rest) = self.data.split_at(8);
        self.data = rest;
        Ok(head.try_into().expect("8 bytes"))
    }

    fn u64(&mut self) -> Result<usize> {
        usize::try_from(u64::from_le_bytes(self.take8()?))
            .map_err(|_| Error::Format("size overflow".into()))
    }

    fn f64(&mut self) -> Result<f64> {
        Ok(f64::from_le_bytes(self.take8()?))
    }
}

pub fn decode_pyramid(data: &[u8]) -> Result<CurveletPyramid> {
    let mut r = Reader { data };
    if &r.take8()? != MAGIC {
        return Err(Error::Format("bad magic".into()));
    }
    let height = r.u64()?;
    let width = r.u64()?;
    let scales = r.u64()?;
    let coarse_angles = r.u64()?;
    let finest = match r.u64()? {
        0 => FinestLevel::Wavelets,
        1 => FinestLevel::Curvelets,
        other => return Err(Error::Format(format!("unknown finest level {other}"))),
    };
    let range = DynamicRange::new(r.f64()?, r.f64()?)?;
    let params = CurveletParams {
        scales,
        coarse_angles,
        finest,
    };
    let geometry = Arc::new(CurveletGeometry::new(width, height, params)?);
    let count = r.u64()?;
    if count != geometry.subband_count() {
        return Err(Error::Format(format!(
            "{count} bands, geometry has {}",
            geometry.subband_count()
        )));
    }
    let mut shapes = Vec::with_capacity(count);
    for band in geometry.subbands() {
        let shape = (r.u64()?, r.u64()?);
        if shape != (band.rows, band.cols) {
            return Err(Error::Format(format!("band shape {shape:?} does not match geometry")));
        }
        shapes.push(shape);
    }
    let mut bands = Vec::with_capacity(count);
    for (rows, cols) in shapes {
        let mut values = Vec::with_capacity(rows * cols);
        for _ in 0..rows * cols {
            values.push(Complex64::new(r.f64()?, r.f64()?));
        }
        bands.push(Array2::from_shape_vec((rows, cols), values).expect("shape"));
    }
    if !r.data.is_empty() {
        return Err(Error::Format("trailing bytes".into()));
    }
    Ok(CurveletPyramid::from_bands(geometry, bands)?.with_range(range))
}

pub fn write_pyramid(pyr: &CurveletPyramid, path: impl AsRef<Path>) -> Result<()> {
    let path = path.as_ref();
    std::fs::write(path, encode_pyramid(pyr)).map_err(|source| Error::Io {
        path: path.to_path_buf(),
        source,
    })
}

pub fn read_pyramid(path: impl AsRef<Path>) -> Result<CurveletPyramid> {
    let path = path.as_ref();
    let data = std::fs::read(path).map_err(|source| Error::Io {
        path: path.to_path_buf(),
        source,
    })?;
    decode_pyramid(&data)
}
