//! Fixtures shared by the criterion benches.

use dejasp_core::{corrupt, ImageBuffer, NoiseSpec};

/// Smooth shading plus a bright disk and a striped patch, `n x n`.
pub fn scene(n: usize) -> ImageBuffer {
    let s = n as f64;
    ImageBuffer::from_fn(n, n, |(r, c)| {
        let (x, y) = (c as f64 / s, r as f64 / s);
        let disk = if (x - 0.35).powi(2) + (y - 0.6).powi(2) < 0.04 { 70.0 } else { 0.0 };
        let stripes = if x > 0.6 && y < 0.4 { 30.0 * (c as f64 * 0.8).sin() } else { 0.0 };
        (70.0 + 60.0 * x + 40.0 * y + disk + stripes).clamp(0.0, 255.0)
    })
    .expect("nonempty scene")
}

/// `scene(n)` with Gaussian noise `sigma` and salt-and-pepper ratio `r_sp`.
pub fn noisy_scene(n: usize, sigma: f64, r_sp: f64) -> ImageBuffer {
    let spec = NoiseSpec::new(sigma, r_sp, 0.0, 0).expect("valid noise");
    corrupt(&scene(n), &spec).expect("corruptible scene")
}
