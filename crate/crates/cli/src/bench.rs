//! Table runs: every image x noise cell, averaged over seeded trials.

use std::io::Write;
use std::path::Path;

use anyhow::{Context, Result};
use dejasp_core::{corrupt, ImageBuffer, NoiseLevel, QualityScore};
use rayon::prelude::*;

use crate::manifest::{NoiseCell, RunManifest};
use crate::restore::{restore, Request};

pub const CSV_HEADER: &str = "image,r_sp,r_rv,sigma,method,psnr_mean,ssim_mean,trials";

#[derive(Debug, Clone, PartialEq)]
pub struct BenchRow {
    pub image: String,
    pub cell: NoiseCell,
    /// `noisy`, `init`, or the method name.
    pub method: String,
    pub psnr_mean: f64,
    pub ssim_mean: f64,
    pub trials: usize,
}

#[derive(Debug, Clone, PartialEq)]
pub struct BenchReport {
    pub method: String,
    pub rows: Vec<BenchRow>,
}

/// Round trip through 8-bit samples, as a corrupted image written to disk would be.
pub fn quantize(img: &ImageBuffer) -> Result<ImageBuffer> {
    Ok(ImageBuffer::from_u8(img.width(), img.height(), &img.to_u8(), img.range())?)
}

/// Seeded observation used by trial `i` of a cell.
pub fn observation(clean: &ImageBuffer, cell: &NoiseCell, seed: u64) -> Result<ImageBuffer> {
    quantize(&corrupt(clean, &cell.spec(seed)?)?)
}

fn image_name(path: &Path) -> String {
    path.file_stem()
        .map(|s| s.to_string_lossy().into_owned())
        .unwrap_or_else(|| path.display().to_string())
}

/// Runs the manifest with at most `jobs` cells in flight. Output order and
/// values do not depend on `jobs`.
pub fn run_bench(m: &RunManifest, jobs: usize, log: impl Fn(&str) + Sync) -> Result<BenchReport> {
    m.validate()?;
    let settings = m.settings()?;
    let images = m
        .images
        .iter()
        .map(|p| Ok((image_name(p), ImageBuffer::load(p).with_context(|| format!("loading {}", p.display()))?)))
        .collect::<Result<Vec<_>>>()?;
    let cells: Vec<_> = images
        .iter()
        .flat_map(|(name, img)| m.noise.iter().map(move |cell| (name, img, *cell)))
        .collect();

    let run_cell = |(name, clean, cell): &(&String, &ImageBuffer, NoiseCell)| -> Result<Vec<BenchRow>> {
        let req = Request {
            method: m.method,
            kind: cell.kind(),
            level: if m.estimate_sigma {
                NoiseLevel::Auto
            } else {
                NoiseLevel::Declared(cell.sigma)
            },
            ratio: Some(cell.ratio()),
            settings: &settings,
            iters: None,
        };
        let mut sums = [[0.0f64; 2]; 3];
        for i in 0..m.trials {
            let f = observation(clean, cell, m.base_seed + i as u64)?;
            let out = restore(&f, &req, None)?;
            for (sum, img) in sums.iter_mut().zip([&f, &out.init, &out.image]) {
                let q = QualityScore::measure(clean, img)?;
                sum[0] += q.psnr_db;
                sum[1] += q.ssim;
            }
        }
        let n = m.trials as f64;
        let rows: Vec<BenchRow> = ["noisy".to_string(), "init".to_string(), m.method.to_string()]
            .into_iter()
            .zip(sums)
            .map(|(method, [p, s])| BenchRow {
                image: (*name).clone(),
                cell: *cell,
                method,
                psnr_mean: p / n,
                ssim_mean: s / n,
                trials: m.trials,
            })
            .collect();
        log(&format!(
            "{} sigma={} r_sp={} r_rv={}: noisy {:.2}/{:.3} init {:.2}/{:.3} {} {:.2}/{:.3}",
            name,
            cell.sigma,
            cell.r_sp,
            cell.r_rv,
            rows[0].psnr_mean,
            rows[0].ssim_mean,
            rows[1].psnr_mean,
            rows[1].ssim_mean,
            m.method,
            rows[2].psnr_mean,
            rows[2].ssim_mean
        ));
        Ok(rows)
    };

    let pool = rayon::ThreadPoolBuilder::new().num_threads(jobs.max(1)).build()?;
    let per_cell = pool.install(|| {
        cells
            .par_iter()
            .map(|c| {
                run_cell(c).with_context(|| {
                    format!("cell {} sigma={} r_sp={} r_rv={} failed", c.0, c.2.sigma, c.2.r_sp, c.2.r_rv)
                })
            })
            .collect::<Result<Vec<_>>>()
    })?;
    Ok(BenchReport {
        method: m.method.to_string(),
        rows: per_cell.into_iter().flatten().collect(),
    })
}

impl BenchReport {
    pub fn write_csv(&self, mut out: impl Write) -> std::io::Result<()> {
        writeln!(out, "{CSV_HEADER}")?;
        for r in &self.rows {
            writeln!(
                out,
                "{},{},{},{},{},{:.4},{:.4},{}",
                r.image, r.cell.r_sp, r.cell.r_rv, r.cell.sigma, r.method, r.psnr_mean, r.ssim_mean, r.trials
            )?;
        }
        Ok(())
    }

    /// One line per image and noise cell, with PSNR/SSIM for noisy, init and the method.
    pub fn markdown(&self) -> String {
        let mut s = format!(
            "| Image | r_sp | r_rv | sigma | Noisy | Init | {} |\n|---|---|---|---|---|---|---|\n",
            self.method
        );
        for group in self.rows.chunks(3) {
            let r = &group[0];
            s.push_str(&format!("| {} | {} | {} | {} |", r.image, r.cell.r_sp, r.cell.r_rv, r.cell.sigma));
            for row in group {
                s.push_str(&format!(" {:.2}/{:.3} |", row.psnr_mean, row.ssim_mean));
            }
            s.push('\n');
        }
        s
    }

    /// Writes `bench.csv` and `bench.md` into `dir`.
    pub fn write_to(&self, dir: &Path) -> Result<()> {
        std::fs::create_dir_all(dir).with_context(|| format!("creating {}", dir.display()))?;
        let csv = dir.join("bench.csv");
        let mut file = std::fs::File::create(&csv).with_context(|| format!("creating {}", csv.display()))?;
        self.write_csv(&mut file)?;
        let md = dir.join("bench.md");
        std::fs::write(&md, self.markdown()).with_context(|| format!("writing {}", md.display()))?;
        Ok(())
    }
}
