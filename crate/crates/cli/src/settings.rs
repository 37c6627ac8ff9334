//! Flat `key = value` settings shared by the config file, `--set` flags and
//! bench manifests.
//!
//! | key | applies to |
//! |---|---|
//! | `mu`, `mu1_fraction`, `fidelity`, `tau_prime`, `tol`, `k_max` | dejasp |
//! | `patch`, `step`, `window`, `matches` | dejasp |
//! | `scales`, `finest` (`wavelets` or `curvelets`) | dejasp |
//! | `ml_window`, `calibration_trials`, `calibration_seed` | act, dejasp |
//! | `act_iters`, `act_decay`, `act_blend` | act |
//! | `amf_max_window`, `acwmf_s`, `acwmf_deltas` | every method |

use std::path::Path;

use anyhow::{bail, Context, Result};
use dejasp_core::{ActConfig, DetectorConfig, FinestLevel, SolverConfig};
use serde::Deserialize;

#[derive(Debug, Clone, Default, PartialEq, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Settings {
    pub mu: Option<f64>,
    pub mu1_fraction: Option<f64>,
    pub fidelity: Option<f64>,
    pub tau_prime: Option<f64>,
    pub tol: Option<f64>,
    pub k_max: Option<usize>,
    pub patch: Option<usize>,
    pub step: Option<usize>,
    pub window: Option<usize>,
    pub matches: Option<usize>,
    pub scales: Option<usize>,
    pub finest: Option<String>,
    pub ml_window: Option<usize>,
    pub calibration_trials: Option<usize>,
    pub calibration_seed: Option<u64>,
    pub act_iters: Option<usize>,
    pub act_decay: Option<f64>,
    pub act_blend: Option<f64>,
    pub amf_max_window: Option<usize>,
    pub acwmf_s: Option<f64>,
    pub acwmf_deltas: Option<[f64; 4]>,
}

macro_rules! overlay {
    ($base:ident, $top:ident, $($field:ident),*) => {
        Settings { $($field: $top.$field.or($base.$field)),* }
    };
}

impl Settings {
    pub fn parse(text: &str) -> Result<Self> {
        let table: toml::Table = text.parse().context("settings are not valid key = value lines")?;
        for (key, value) in &table {
            if value.is_table() {
                bail!("settings must be flat, but '{key}' is a table");
            }
        }
        let table = toml::Table::from_iter(table.into_iter().map(|(k, v)| match v {
            toml::Value::Integer(i) if FLOAT_KEYS.contains(&k.as_str()) => (k, toml::Value::Float(i as f64)),
            other => (k, other),
        }));
        Self::deserialize(table).context("unrecognized setting")
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))?;
        Self::parse(&text).with_context(|| format!("in {}", path.display()))
    }

    /// Parses `key=value` pairs. Bare words are taken as strings.
    pub fn from_pairs<S: AsRef<str>>(pairs: &[S]) -> Result<Self> {
        let mut lines = String::new();
        for pair in pairs {
            let pair = pair.as_ref();
            let Some((key, value)) = pair.split_once('=') else {
                bail!("expected key=value, got '{pair}'");
            };
            let (key, value) = (key.trim(), value.trim());
            let literal = if format!("v = {value}").parse::<toml::Table>().is_ok() {
                value.to_string()
            } else {
                format!("{value:?}")
            };
            lines.push_str(&format!("{key} = {literal}\n"));
        }
        Self::parse(&lines)
    }

    /// Values in `top` win over values in `self`.
    pub fn overlay(self, top: Settings) -> Settings {
        let base = self;
        overlay!(
            base,
            top,
            mu,
            mu1_fraction,
            fidelity,
            tau_prime,
            tol,
            k_max,
            patch,
            step,
            window,
            matches,
            scales,
            finest,
            ml_window,
            calibration_trials,
            calibration_seed,
            act_iters,
            act_decay,
            act_blend,
            amf_max_window,
            acwmf_s,
            acwmf_deltas
        )
    }

    pub fn detector(&self) -> DetectorConfig {
        let mut d = DetectorConfig::default();
        set(&mut d.amf_max_window, self.amf_max_window);
        set(&mut d.acwmf.s, self.acwmf_s);
        set(&mut d.acwmf.deltas, self.acwmf_deltas);
        d
    }

    pub fn solver_config(&self, base: SolverConfig) -> Result<SolverConfig> {
        let mut cfg = base;
        set(&mut cfg.mu, self.mu);
        set(&mut cfg.mu1_fraction, self.mu1_fraction);
        set(&mut cfg.fidelity, self.fidelity);
        set(&mut cfg.tau_prime, self.tau_prime);
        set(&mut cfg.tol, self.tol);
        set(&mut cfg.k_max, self.k_max);
        set(&mut cfg.patches.patch, self.patch);
        set(&mut cfg.patches.step, self.step);
        set(&mut cfg.patches.window, self.window);
        set(&mut cfg.patches.matches, self.matches);
        if self.scales.is_some() {
            cfg.scales = self.scales;
        }
        if let Some(finest) = &self.finest {
            cfg.finest = match finest.to_ascii_lowercase().as_str() {
                "wavelets" => FinestLevel::Wavelets,
                "curvelets" => FinestLevel::Curvelets,
                other => bail!("finest must be 'wavelets' or 'curvelets', got '{other}'"),
            };
        }
        set(&mut cfg.ml_window, self.ml_window);
        set(&mut cfg.calibration_trials, self.calibration_trials);
        set(&mut cfg.calibration_seed, self.calibration_seed);
        cfg.detector = self.detector();
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn act_config(&self) -> Result<ActConfig> {
        let mut cfg = ActConfig::default();
        set(&mut cfg.iters, self.act_iters);
        set(&mut cfg.decay, self.act_decay);
        set(&mut cfg.blend, self.act_blend);
        set(&mut cfg.ml_window, self.ml_window);
        set(&mut cfg.calibration_trials, self.calibration_trials);
        set(&mut cfg.calibration_seed, self.calibration_seed);
        cfg.detector = self.detector();
        cfg.validate()?;
        Ok(cfg)
    }
}

const FLOAT_KEYS: &[&str] = &[
    "mu",
    "mu1_fraction",
    "fidelity",
    "tau_prime",
    "tol",
    "act_decay",
    "act_blend",
    "acwmf_s",
];

fn set<T>(slot: &mut T, value: Option<T>) {
    if let Some(v) = value {
        *slot = v;
    }
}
