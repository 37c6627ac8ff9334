use std::path::{Path, PathBuf};

use anyhow::{bail, Context, Result};
use dejasp_core::{NoiseKind, NoiseSpec};
use serde::Deserialize;

use crate::restore::Method;
use crate::settings::Settings;

/// A bench run, read from TOML:
///
/// ```toml
/// images = ["barbara.png", "boat.png"]
/// method = "dejasp"
/// trials = 10
/// base_seed = 0
/// out_dir = "results"
///
/// [[noise]]
/// sigma = 20
/// r_sp = 0.2
///
/// [config]
/// k_max = 20
/// ```
///
/// Relative paths are resolved against the manifest's directory.
#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunManifest {
    pub images: Vec<PathBuf>,
    pub noise: Vec<NoiseCell>,
    pub method: Method,
    #[serde(default = "default_trials")]
    pub trials: usize,
    #[serde(default)]
    pub base_seed: u64,
    /// Estimate sigma instead of declaring the true value.
    #[serde(default)]
    pub estimate_sigma: bool,
    #[serde(default)]
    pub config: toml::Table,
    pub out_dir: Option<PathBuf>,
}

#[derive(Debug, Clone, Copy, PartialEq, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct NoiseCell {
    pub sigma: f64,
    #[serde(default)]
    pub r_sp: f64,
    #[serde(default)]
    pub r_rv: f64,
}

impl NoiseCell {
    pub fn spec(&self, seed: u64) -> Result<NoiseSpec> {
        Ok(NoiseSpec::new(self.sigma, self.r_sp, self.r_rv, seed)?)
    }

    /// Impulse model matching the cell's ratios.
    pub fn kind(&self) -> NoiseKind {
        match (self.r_sp > 0.0, self.r_rv > 0.0) {
            (true, true) => NoiseKind::SaltPepperRandomValued,
            (false, true) => NoiseKind::RandomValued,
            _ => NoiseKind::SaltPepper,
        }
    }

    pub fn ratio(&self) -> f64 {
        self.r_sp + self.r_rv
    }
}

fn default_trials() -> usize {
    10
}

impl RunManifest {
    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))?;
        let mut m: RunManifest = toml::from_str(&text).with_context(|| format!("parsing {}", path.display()))?;
        let base = path.parent().unwrap_or(Path::new("."));
        for img in &mut m.images {
            if img.is_relative() {
                *img = base.join(&*img);
            }
        }
        if let Some(dir) = &mut m.out_dir {
            if dir.is_relative() {
                *dir = base.join(&*dir);
            }
        }
        m.validate()?;
        Ok(m)
    }

    pub fn validate(&self) -> Result<()> {
        if self.trials == 0 {
            bail!("trials must be at least 1");
        }
        if self.images.is_empty() {
            bail!("manifest lists no images");
        }
        if self.noise.is_empty() {
            bail!("manifest lists no noise cells");
        }
        for cell in &self.noise {
            cell.spec(0)?;
        }
        self.settings()?;
        Ok(())
    }

    pub fn settings(&self) -> Result<Settings> {
        Settings::parse(&toml::to_string(&self.config)?).context("in [config]")
    }
}
