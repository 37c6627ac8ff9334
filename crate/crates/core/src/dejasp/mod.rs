//! Split Bregman solver combining masked data fidelity, adaptive curvelet
//! shrinkage and nonlocal group sparsity.
//!
//! One outer iteration, with `Psi` the curvelet transform:
//!
//! ```text
//! 1. u~ = u;  theta^ = Psi u + b;  z = u - c
//! 2. theta = ACT(theta^)
//! 3. w = Omega(S_{K tau' / (mu2 n)}(Theta_z))
//! 4. D = mu1 Psi^T (theta - b) + mu2 (w + c) + gamma Phi f
//!    u = D / (mu + gamma) on clean pixels, D / mu on impulse candidates
//! 5. s = SSIM(u, u~);  diff = |s - s_prev|
//! 6. b <- b - theta + Psi u;  c <- c - u + w
//! ```
//!
//! and the loop stops after `k_max` iterations or once `diff <= tol`.

mod tau;

use std::io::Write;
use std::time::Instant;

use ndarray::{Array2, Zip};

use crate::act::{act_shrink, resolve_noise, NoiseLevel, ShrinkageField};
use crate::curvelet::{CurveletParams, CurveletPyramid, CurveletTransform, FinestLevel, SubbandNoiseProfile};
use crate::error::{Error, Result};
use crate::image::ImageBuffer;
use crate::impulse::{detect, DetectorConfig, NoiseKind, PixelMask};
use crate::metrics::{psnr, ssim};
use crate::nlsm::{block_match, nlsm_coefficients, nlsm_prior, nlsm_shrink_inverse, MatchSets, PatchGeometry};

pub use tau::{default_tau_prime, TAU_PRIME_TABLE};

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SolverConfig {
    /// Total penalty weight `mu = mu1 + mu2`.
    pub mu: f64,
    /// `mu1 = mu1_fraction * mu`.
    pub mu1_fraction: f64,
    /// Weight `gamma` of the masked data-fidelity term.
    pub fidelity: f64,
    pub tau_prime: f64,
    pub tol: f64,
    pub k_max: usize,
    pub patches: PatchGeometry,
    /// Curvelet scales; `None` picks the default for the image size.
    pub scales: Option<usize>,
    pub finest: FinestLevel,
    pub ml_window: usize,
    pub calibration_trials: usize,
    pub calibration_seed: u64,
    pub detector: DetectorConfig,
}

impl Default for SolverConfig {
    fn default() -> Self {
        Self {
            mu: 2.7e-3,
            mu1_fraction: 0.16,
            fidelity: tau::DEFAULT_FIDELITY,
            tau_prime: default_tau_prime(20.0, 0.2),
            tol: 1e-3,
            k_max: 20,
            patches: PatchGeometry::default(),
            scales: None,
            finest: FinestLevel::Wavelets,
            ml_window: 7,
            calibration_trials: 30,
            calibration_seed: 0,
            detector: DetectorConfig::default(),
        }
    }
}

impl SolverConfig {
    /// Defaults with `tau'` taken from the shipped table for a noise cell.
    pub fn for_noise(sigma: f64, impulse_ratio: f64) -> Self {
        Self {
            tau_prime: default_tau_prime(sigma, impulse_ratio),
            ..Self::default()
        }
    }

    pub fn mu1(&self) -> f64 {
        self.mu1_fraction * self.mu
    }

    /// `mu - mu1`, so that `mu1 + mu2 == mu`.
    pub fn mu2(&self) -> f64 {
        self.mu - self.mu1()
    }

    /// Group-coefficient threshold `K_Theta tau' / (mu2 n)`.
    pub fn w_threshold(&self, coefficient_count: usize, pixels: usize) -> f64 {
        coefficient_count as f64 * self.tau_prime / (self.mu2() * pixels as f64)
    }

    pub fn validate(&self) -> Result<()> {
        let bad = |msg: String| Err(Error::InvalidParameter(msg));
        let positive = |v: f64| v.is_finite() && v > 0.0;
        if !positive(self.mu) {
            return bad(format!("mu {} must be positive", self.mu));
        }
        if !(self.mu1_fraction > 0.0 && self.mu1_fraction < 1.0) {
            return bad(format!("mu1_fraction {} not in (0, 1)", self.mu1_fraction));
        }
        if !positive(self.fidelity) {
            return bad(format!("fidelity {} must be positive", self.fidelity));
        }
        if !(self.tau_prime.is_finite() && self.tau_prime >= 0.0) {
            return bad(format!("tau_prime {} must be >= 0", self.tau_prime));
        }
        if !(self.tol.is_finite() && self.tol >= 0.0) {
            return bad(format!("tol {} must be >= 0", self.tol));
        }
        if self.k_max == 0 {
            return bad("k_max must be at least 1".into());
        }
        if self.ml_window.is_multiple_of(2) {
            return bad(format!("ml_window {} must be odd", self.ml_window));
        }
        if self.calibration_trials == 0 {
            return bad("calibration_trials must be at least 1".into());
        }
        Ok(())
    }

    fn curvelet_params(&self, width: usize, height: usize) -> CurveletParams {
        let base = CurveletParams::for_size(width, height);
        CurveletParams {
            scales: self.scales.unwrap_or(base.scales),
            finest: self.finest,
            ..base
        }
    }
}

/// Everything the loop carries between iterations.
#[derive(Debug, Clone)]
pub struct SolverState {
    pub f: ImageBuffer,
    pub mask: PixelMask,
    pub u: ImageBuffer,
    pub vartheta: CurveletPyramid,
    pub w: ImageBuffer,
    pub b: CurveletPyramid,
    pub c: ImageBuffer,
    pub k: usize,
    pub ssim_trace: Vec<f64>,
}

impl SolverState {
    /// `s^k`, with `s^0 = 0`.
    pub fn last_ssim(&self) -> f64 {
        self.ssim_trace.last().copied().unwrap_or(0.0)
    }
}

/// One row of the iteration log.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct IterationRecord {
    pub k: usize,
    pub psnr: Option<f64>,
    pub ssim_vs_clean: Option<f64>,
    pub s_k: f64,
    pub diff: f64,
    pub wall_ms: f64,
}

/// Writes `k,psnr,ssim_vs_clean,s_k,diff,wall_ms`; missing scores are empty.
pub fn write_trace_csv(records: &[IterationRecord], mut out: impl Write) -> std::io::Result<()> {
    writeln!(out, "k,psnr,ssim_vs_clean,s_k,diff,wall_ms")?;
    let opt = |v: Option<f64>| v.map(|x| x.to_string()).unwrap_or_default();
    for r in records {
        writeln!(
            out,
            "{},{},{},{},{},{}",
            r.k,
            opt(r.psnr),
            opt(r.ssim_vs_clean),
            r.s_k,
            r.diff,
            r.wall_ms
        )?;
    }
    Ok(())
}

/// Intermediate values of one iteration, for checking the update order.
#[derive(Debug, Clone)]
pub struct StepTrace {
    pub u_tilde: ImageBuffer,
    pub vartheta_hat: CurveletPyramid,
    pub z: ImageBuffer,
    pub vartheta: CurveletPyramid,
    pub matches: MatchSets,
    pub w_threshold: f64,
    pub w: ImageBuffer,
    pub u: ImageBuffer,
    pub b_prev: CurveletPyramid,
    pub c_prev: ImageBuffer,
    pub b: CurveletPyramid,
    pub c: ImageBuffer,
    pub s: f64,
    pub diff: f64,
}

/// `D = mu1 Psi^T (theta - b) + mu2 (w + c) + gamma Phi f`.
pub fn u_rhs(
    synthesis: &ImageBuffer,
    w: &ImageBuffer,
    c: &ImageBuffer,
    f: &ImageBuffer,
    mask: &PixelMask,
    cfg: &SolverConfig,
) -> Result<Array2<f64>> {
    for img in [w, c, f] {
        synthesis.check_same_dims(img)?;
    }
    if mask.dim() != f.dim() {
        return Err(Error::DimensionMismatch {
            left: f.dim(),
            right: mask.dim(),
        });
    }
    let (mu1, mu2, gamma) = (cfg.mu1(), cfg.mu2(), cfg.fidelity);
    let mut d = synthesis.pixels() * mu1;
    Zip::from(&mut d)
        .and(w.pixels())
        .and(c.pixels())
        .and(f.pixels())
        .and(mask.flags())
        .for_each(|d, &w, &c, &f, &m| {
            *d += mu2 * (w + c) + if m { gamma * f } else { 0.0 };
        });
    Ok(d)
}

/// Elementwise solution of `(gamma Phi^T Phi + mu I) u = D`.
pub fn solve_u(d: &Array2<f64>, mask: &PixelMask, cfg: &SolverConfig) -> Array2<f64> {
    let (mu, gamma) = (cfg.mu, cfg.fidelity);
    let mut u = d.clone();
    Zip::from(&mut u)
        .and(mask.flags())
        .for_each(|u, &m| *u /= if m { mu + gamma } else { mu });
    u
}

/// The u-subproblem for the current state.
pub fn u_subproblem(state: &SolverState, transform: &CurveletTransform, cfg: &SolverConfig) -> Result<ImageBuffer> {
    let synthesis = transform.inverse(&state.vartheta.sub(&state.b)?)?;
    let d = u_rhs(&synthesis, &state.w, &state.c, &state.f, &state.mask, cfg)?;
    state.f.with_pixels(solve_u(&d, &state.mask, cfg))
}

/// `theta^ = Psi u + b` and its adaptive shrinkage.
pub fn theta_subproblem(
    u: &ImageBuffer,
    b: &CurveletPyramid,
    transform: &CurveletTransform,
    profile: &SubbandNoiseProfile,
    cfg: &SolverConfig,
) -> Result<(CurveletPyramid, CurveletPyramid)> {
    let hat = transform.forward(u)?.add(b)?;
    let shrunk = act_shrink(&hat, profile, cfg.ml_window)?;
    Ok((hat, shrunk))
}

/// Group-sparsity step on `z = u - c`, with match sets computed from `z`.
pub fn w_subproblem(z: &ImageBuffer, cfg: &SolverConfig) -> Result<(ImageBuffer, MatchSets, f64)> {
    let sets = block_match(z, &cfg.patches)?;
    let theta = nlsm_coefficients(z, &sets)?;
    let threshold = cfg.w_threshold(theta.len(), z.len());
    let w = nlsm_shrink_inverse(&theta, &sets, threshold)?;
    Ok((w, sets, threshold))
}

/// Solver bound to one image size and noise level.
#[derive(Debug, Clone)]
pub struct Solver {
    cfg: SolverConfig,
    transform: CurveletTransform,
    profile: SubbandNoiseProfile,
    sigma: f64,
    init: ImageBuffer,
    state: SolverState,
}

#[derive(Debug, Clone)]
pub struct SolveOutput {
    /// Final estimate, clamped to the dynamic range.
    pub image: ImageBuffer,
    pub u_init: ImageBuffer,
    pub mask: PixelMask,
    pub sigma: f64,
    pub trace: Vec<IterationRecord>,
    /// Match sets of the last iteration.
    pub matches: Option<MatchSets>,
    pub state: SolverState,
}

impl Solver {
    /// Initialization: median-filter estimate and mask, zero Bregman
    /// variables, and the noise profile for the declared or estimated level.
    pub fn new(f: &ImageBuffer, kind: NoiseKind, level: NoiseLevel, cfg: &SolverConfig) -> Result<Self> {
        cfg.validate()?;
        cfg.patches.validate(f.width(), f.height())?;
        let det = detect(f, kind, &cfg.detector)?;
        let transform = CurveletTransform::new(f.width(), f.height(), cfg.curvelet_params(f.width(), f.height()))?;
        let (unit, sigma) = resolve_noise(&transform, &det.u_init, level, cfg.calibration_trials, cfg.calibration_seed)?;
        let profile = unit.rescaled(sigma)?;
        let zero_img = f.with_pixels(Array2::zeros(f.dim()))?;
        let zero_pyr = CurveletPyramid::zeros(transform.geometry().clone());
        let state = SolverState {
            f: f.clone(),
            mask: det.mask,
            u: det.u_init.clone(),
            vartheta: zero_pyr.clone(),
            w: zero_img.clone(),
            b: zero_pyr,
            c: zero_img,
            k: 0,
            ssim_trace: Vec::new(),
        };
        Ok(Self {
            cfg: *cfg,
            transform,
            profile,
            sigma,
            init: det.u_init,
            state,
        })
    }

    pub fn config(&self) -> &SolverConfig {
        &self.cfg
    }

    pub fn transform(&self) -> &CurveletTransform {
        &self.transform
    }

    pub fn profile(&self) -> &SubbandNoiseProfile {
        &self.profile
    }

    pub fn sigma(&self) -> f64 {
        self.sigma
    }

    pub fn state(&self) -> &SolverState {
        &self.state
    }

    pub fn u_init(&self) -> &ImageBuffer {
        &self.init
    }

    /// Replaces `tau'`, e.g. once the noise level has been estimated.
    pub fn set_tau_prime(&mut self, tau_prime: f64) -> Result<()> {
        let cfg = SolverConfig { tau_prime, ..self.cfg };
        cfg.validate()?;
        self.cfg = cfg;
        Ok(())
    }

    /// One outer iteration, returning every intermediate value.
    pub fn step_traced(&mut self) -> Result<StepTrace> {
        let cfg = &self.cfg;
        let st = &self.state;
        let u_tilde = st.u.clone();
        let z = u_tilde.with_pixels(u_tilde.pixels() - st.c.pixels())?;
        let (vartheta_hat, vartheta) = theta_subproblem(&u_tilde, &st.b, &self.transform, &self.profile, cfg)?;
        let (w, matches, w_threshold) = w_subproblem(&z, cfg)?;

        let synthesis = self.transform.inverse(&vartheta.sub(&st.b)?)?;
        let d = u_rhs(&synthesis, &w, &st.c, &st.f, &st.mask, cfg)?;
        let u = st.f.with_pixels(solve_u(&d, &st.mask, cfg))?;

        let s = ssim(&u, &u_tilde)?;
        let diff = (s - st.last_ssim()).abs();

        let psi_u = self.transform.forward(&u)?;
        let b = st.b.sub(&vartheta)?.add(&psi_u)?;
        let c = st.c.with_pixels(st.c.pixels() - u.pixels() + w.pixels())?;

        let trace = StepTrace {
            u_tilde,
            vartheta_hat,
            z,
            vartheta: vartheta.clone(),
            matches,
            w_threshold,
            w: w.clone(),
            u: u.clone(),
            b_prev: st.b.clone(),
            c_prev: st.c.clone(),
            b: b.clone(),
            c: c.clone(),
            s,
            diff,
        };
        let st = &mut self.state;
        st.u = u;
        st.vartheta = vartheta;
        st.w = w;
        st.b = b;
        st.c = c;
        st.k += 1;
        st.ssim_trace.push(s);
        Ok(trace)
    }

    /// Runs to the stopping rule and returns the clamped estimate with its log.
    pub fn run(mut self, clean: Option<&ImageBuffer>) -> Result<SolveOutput> {
        if let Some(clean) = clean {
            clean.check_same_dims(&self.state.f)?;
        }
        let mut trace = Vec::new();
        let mut matches = None;
        while self.state.k < self.cfg.k_max {
            let start = Instant::now();
            let step = self.step_traced()?;
            let wall_ms = start.elapsed().as_secs_f64() * 1e3;
            let (psnr_k, ssim_k) = match clean {
                Some(clean) => {
                    let out = step.u.clamped();
                    (Some(psnr(clean, &out)?), Some(ssim(clean, &out)?))
                }
                None => (None, None),
            };
            trace.push(IterationRecord {
                k: self.state.k,
                psnr: psnr_k,
                ssim_vs_clean: ssim_k,
                s_k: step.s,
                diff: step.diff,
                wall_ms,
            });
            let stop = step.diff <= self.cfg.tol;
            matches = Some(step.matches);
            if stop {
                break;
            }
        }
        Ok(SolveOutput {
            image: self.state.u.clamped(),
            u_init: self.init,
            mask: self.state.mask.clone(),
            sigma: self.sigma,
            trace,
            matches,
            state: self.state,
        })
    }
}

/// Full restoration of `f`.
pub fn solve(
    f: &ImageBuffer,
    kind: NoiseKind,
    level: NoiseLevel,
    cfg: &SolverConfig,
    clean: Option<&ImageBuffer>,
) -> Result<SolveOutput> {
    Solver::new(f, kind, level, cfg)?.run(clean)
}

/// Composite objective `gamma/2 |Phi(f - u)|^2 + sum lambda |Psi u| + tau' |Theta_u|`,
/// with `lambda = mu1 rho` from the adaptive field of `Psi u` (low-pass
/// excluded) and match sets computed from `u`.
pub fn objective(
    u: &ImageBuffer,
    f: &ImageBuffer,
    mask: &PixelMask,
    transform: &CurveletTransform,
    profile: &SubbandNoiseProfile,
    cfg: &SolverConfig,
) -> Result<f64> {
    u.check_same_dims(f)?;
    let mut data = 0.0;
    Zip::from(u.pixels())
        .and(f.pixels())
        .and(mask.flags())
        .for_each(|&u, &f, &m| {
            if m {
                data += (f - u) * (f - u);
            }
        });
    let pyr = transform.forward(u)?;
    let field = ShrinkageField::new(&pyr, profile, cfg.ml_window)?;
    let coarse = transform.geometry().scale_range(0);
    let mut sparsity = 0.0;
    for (i, (band, rho)) in pyr.bands().iter().zip(field.thresholds()).enumerate() {
        if coarse.contains(&i) {
            continue;
        }
        for (c, r) in band.iter().zip(rho) {
            if r.is_finite() {
                sparsity += cfg.mu1() * r * c.norm();
            }
        }
    }
    let sets = block_match(u, &cfg.patches)?;
    let group = cfg.tau_prime * nlsm_prior(&nlsm_coefficients(u, &sets)?);
    Ok(0.5 * cfg.fidelity * data + sparsity + group)
}
