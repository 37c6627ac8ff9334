use std::io::Write;
use std::path::{Path, PathBuf};

use anyhow::{Context, Result};
use clap::{Args, Parser, Subcommand};
use dejasp_core::dejasp::write_trace_csv;
use dejasp_core::{corrupt, ImageBuffer, NoiseKind, NoiseLevel, NoiseSpec, QualityScore};

use crate::bench::run_bench;
use crate::manifest::RunManifest;
use crate::restore::{restore, Method, Request};
use crate::settings::Settings;

#[derive(Debug, Parser)]
#[command(name = "dejasp", version, about = "Mixed Gaussian and impulse noise removal")]
pub struct Cli {
    /// Directory for outputs without an explicit path.
    #[arg(long, global = true, env = "DEJASP_OUT_DIR", default_value = ".")]
    pub out_dir: PathBuf,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Add Gaussian and impulse noise to an image.
    Corrupt(CorruptArgs),
    /// Restore a noisy image.
    Denoise(DenoiseArgs),
    /// Score images against a reference.
    Eval(EvalArgs),
    /// Run a table described by a TOML manifest.
    Bench(BenchArgs),
}

#[derive(Debug, Args)]
pub struct CorruptArgs {
    pub input: PathBuf,
    /// Gaussian standard deviation, in gray levels.
    #[arg(long, default_value_t = 0.0)]
    pub sigma: f64,
    /// Salt-and-pepper ratio.
    #[arg(long, default_value_t = 0.0)]
    pub rsp: f64,
    /// Random-valued impulse ratio.
    #[arg(long, default_value_t = 0.0)]
    pub rrv: f64,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct DenoiseArgs {
    pub input: PathBuf,
    #[arg(long, value_enum, default_value_t = Method::Dejasp)]
    pub method: Method,
    /// Impulse model: sp, rv or sp+rv.
    #[arg(long, default_value = "sp")]
    pub model: NoiseKind,
    /// Gaussian noise level, or `auto` to estimate it.
    #[arg(long, default_value = "auto")]
    pub sigma: NoiseLevel,
    /// Impulse ratio used to pick tau'; defaults to the detected fraction.
    #[arg(long)]
    pub ratio: Option<f64>,
    /// Iterations for act and dejasp.
    #[arg(long)]
    pub iters: Option<usize>,
    /// Flat `key = value` settings file.
    #[arg(long)]
    pub config: Option<PathBuf>,
    /// Setting override, `key=value`; wins over --config.
    #[arg(long = "set", value_name = "KEY=VALUE")]
    pub set: Vec<String>,
    /// Clean reference for scoring.
    #[arg(long)]
    pub clean: Option<PathBuf>,
    /// CSV log of the solver iterations.
    #[arg(long)]
    pub trace: Option<PathBuf>,
    /// Impulse mask as an image, 0 for flagged pixels and 255 elsewhere.
    #[arg(long)]
    pub mask_out: Option<PathBuf>,
    /// CSV of the final block-matching groups.
    #[arg(long)]
    pub matches_out: Option<PathBuf>,
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct EvalArgs {
    pub reference: PathBuf,
    #[arg(required = true)]
    pub images: Vec<PathBuf>,
}

#[derive(Debug, Args)]
pub struct BenchArgs {
    pub manifest: PathBuf,
    /// Cells run concurrently.
    #[arg(long, default_value_t = default_jobs())]
    pub jobs: usize,
}

fn default_jobs() -> usize {
    std::thread::available_parallelism().map_or(1, |n| n.get())
}

fn load(path: &Path) -> Result<ImageBuffer> {
    ImageBuffer::load(path).with_context(|| format!("loading {}", path.display()))
}

fn save(img: &ImageBuffer, path: &Path) -> Result<()> {
    if let Some(dir) = path.parent().filter(|d| !d.as_os_str().is_empty()) {
        std::fs::create_dir_all(dir).with_context(|| format!("creating {}", dir.display()))?;
    }
    img.save(path).with_context(|| format!("writing {}", path.display()))
}

fn default_output(out_dir: &Path, input: &Path, suffix: &str) -> PathBuf {
    let stem = input.file_stem().map_or("image".into(), |s| s.to_string_lossy());
    out_dir.join(format!("{stem}_{suffix}.png"))
}

fn create(path: &Path) -> Result<std::fs::File> {
    std::fs::File::create(path).with_context(|| format!("creating {}", path.display()))
}

pub fn run(cli: Cli, out: &mut impl Write) -> Result<()> {
    match cli.command {
        Command::Corrupt(a) => {
            let clean = load(&a.input)?;
            let noisy = corrupt(&clean, &NoiseSpec::new(a.sigma, a.rsp, a.rrv, a.seed)?)?;
            let path = a.out.unwrap_or_else(|| default_output(&cli.out_dir, &a.input, "noisy"));
            save(&noisy, &path)?;
            let q = QualityScore::measure(&clean, &load(&path)?)?;
            writeln!(out, "{} psnr={:.4} ssim={:.4}", path.display(), q.psnr_db, q.ssim)?;
        }
        Command::Denoise(a) => {
            let f = load(&a.input)?;
            let clean = a.clean.as_deref().map(load).transpose()?;
            let mut settings = match &a.config {
                Some(p) => Settings::load(p)?,
                None => Settings::default(),
            };
            settings = settings.overlay(Settings::from_pairs(&a.set)?);
            let req = Request {
                method: a.method,
                kind: a.model,
                level: a.sigma,
                ratio: a.ratio,
                settings: &settings,
                iters: a.iters,
            };
            let r = restore(&f, &req, clean.as_ref())?;
            let path = a.out.unwrap_or_else(|| default_output(&cli.out_dir, &a.input, &a.method.to_string()));
            save(&r.image, &path)?;
            if let Some(p) = &a.mask_out {
                save(&r.mask.to_image(), p)?;
            }
            if let Some(p) = &a.trace {
                write_trace_csv(&r.trace, create(p)?).with_context(|| format!("writing {}", p.display()))?;
            }
            if let Some(p) = &a.matches_out {
                let sets = r
                    .matches
                    .as_ref()
                    .context("--matches-out needs --method dejasp")?;
                sets.write_csv(create(p)?).with_context(|| format!("writing {}", p.display()))?;
            }
            write!(out, "{}", path.display())?;
            if let Some(s) = r.sigma {
                write!(out, " sigma={s:.4}")?;
            }
            if let Some(clean) = &clean {
                let q = QualityScore::measure(clean, &r.image)?;
                write!(out, " psnr={:.4} ssim={:.4}", q.psnr_db, q.ssim)?;
            }
            writeln!(out)?;
        }
        Command::Eval(a) => {
            let reference = load(&a.reference)?;
            for p in &a.images {
                let q = QualityScore::measure(&reference, &load(p)?)
                    .with_context(|| format!("scoring {}", p.display()))?;
                writeln!(out, "{} psnr={:.4} ssim={:.4}", p.display(), q.psnr_db, q.ssim)?;
            }
        }
        Command::Bench(a) => {
            let manifest = RunManifest::load(&a.manifest)?;
            let report = run_bench(&manifest, a.jobs, |line| eprintln!("{line}"))?;
            let dir = manifest.out_dir.clone().unwrap_or(cli.out_dir);
            report.write_to(&dir)?;
            write!(out, "{}", report.markdown())?;
        }
    }
    Ok(())
}
