//! Restoration of grayscale images degraded by Gaussian noise plus
//! salt-and-pepper and/or random-valued impulses.
//!
//! The pipeline: a median-type detector produces an initial estimate and a
//! mask of trusted pixels ([`impulse`]); a split Bregman loop ([`dejasp`])
//! then alternates adaptive curvelet shrinkage ([`act`], [`curvelet`]) with
//! nonlocal group sparsity ([`nlsm`]) under masked data fidelity.

pub mod act;
pub mod curvelet;
pub mod dejasp;
pub mod error;
pub mod image;
pub mod impulse;
pub mod metrics;
pub mod nlsm;
pub mod noise;

pub use act::{act_denoise, ActConfig, ActOutput, NoiseLevel};
pub use curvelet::{CurveletParams, CurveletPyramid, CurveletTransform, FinestLevel, SubbandNoiseProfile};
pub use dejasp::{solve, IterationRecord, SolveOutput, Solver, SolverConfig, SolverState};
pub use error::{Error, Result};
pub use image::{DynamicRange, ImageBuffer};
pub use impulse::{detect, AcwmfParams, Detection, DetectorConfig, NoiseKind, PixelMask};
pub use metrics::{psnr, ssim, QualityScore};
pub use nlsm::{MatchSet, MatchSets, PatchGeometry};
pub use noise::{corrupt, NoiseSpec};
