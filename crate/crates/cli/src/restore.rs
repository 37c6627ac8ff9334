use anyhow::Result;
use clap::ValueEnum;
use dejasp_core::dejasp::default_tau_prime;
use dejasp_core::impulse::{acwmf, amf};
use dejasp_core::{act_denoise, ImageBuffer, IterationRecord, MatchSets, NoiseKind, NoiseLevel, PixelMask, Solver};
use serde::Deserialize;

use crate::settings::Settings;

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Method {
    /// Adaptive median filter only.
    Amf,
    /// Adaptive center-weighted median filter only.
    Acwmf,
    /// Iterative adaptive curvelet thresholding.
    Act,
    /// The full split Bregman solver.
    Dejasp,
}

impl std::fmt::Display for Method {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(match self {
            Method::Amf => "amf",
            Method::Acwmf => "acwmf",
            Method::Act => "act",
            Method::Dejasp => "dejasp",
        })
    }
}

/// What a denoiser run produced.
#[derive(Debug, Clone)]
pub struct Restoration {
    pub image: ImageBuffer,
    pub init: ImageBuffer,
    pub mask: PixelMask,
    /// Noise level used, when the method has one.
    pub sigma: Option<f64>,
    pub trace: Vec<IterationRecord>,
    pub matches: Option<MatchSets>,
}

#[derive(Debug, Clone)]
pub struct Request<'a> {
    pub method: Method,
    pub kind: NoiseKind,
    pub level: NoiseLevel,
    /// Impulse ratio for the `tau'` lookup; the detected fraction when absent.
    pub ratio: Option<f64>,
    pub settings: &'a Settings,
    /// Overrides the iteration count of `act` and `dejasp`.
    pub iters: Option<usize>,
}

pub fn restore(f: &ImageBuffer, req: &Request, clean: Option<&ImageBuffer>) -> Result<Restoration> {
    let detector = req.settings.detector();
    match req.method {
        Method::Amf | Method::Acwmf => {
            let det = match req.method {
                Method::Amf => amf(f, detector.amf_max_window)?,
                _ => acwmf(f, &detector.acwmf)?,
            };
            let image = det.u_init.clamped();
            Ok(Restoration {
                init: image.clone(),
                image,
                mask: det.mask,
                sigma: None,
                trace: Vec::new(),
                matches: None,
            })
        }
        Method::Act => {
            let mut cfg = req.settings.act_config()?;
            if let Some(n) = req.iters {
                cfg.iters = n;
            }
            let out = act_denoise(f, req.kind, req.level, &cfg)?;
            Ok(Restoration {
                image: out.image,
                init: out.u_init,
                mask: out.mask,
                sigma: Some(out.sigma),
                trace: Vec::new(),
                matches: None,
            })
        }
        Method::Dejasp => {
            let mut cfg = req.settings.solver_config(Default::default())?;
            if let Some(n) = req.iters {
                cfg.k_max = n;
            }
            let mut solver = Solver::new(f, req.kind, req.level, &cfg)?;
            if req.settings.tau_prime.is_none() {
                let ratio = req.ratio.unwrap_or(1.0 - solver.state().mask.density());
                solver.set_tau_prime(default_tau_prime(solver.sigma(), ratio))?;
            }
            let out = solver.run(clean)?;
            Ok(Restoration {
                image: out.image,
                init: out.u_init,
                mask: out.mask,
                sigma: Some(out.sigma),
                trace: out.trace,
                matches: out.matches,
            })
        }
    }
}
