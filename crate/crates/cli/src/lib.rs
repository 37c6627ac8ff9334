//! Command-line plumbing for the De-JASP denoiser: corrupting images,
//! running the restoration methods, scoring, and table runs.

pub mod bench;
pub mod cli;
pub mod manifest;
pub mod restore;
pub mod settings;

pub use bench::{run_bench, BenchReport, BenchRow};
pub use cli::{run, Cli};
pub use manifest::{NoiseCell, RunManifest};
pub use restore::{restore, Method, Request, Restoration};
pub use settings::Settings;
