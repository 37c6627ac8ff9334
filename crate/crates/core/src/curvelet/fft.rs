use std::sync::Arc;

use num_complex::Complex64;
use rustfft::{Fft, FftPlanner};

/// Unnormalized 2D FFT on a row-major `rows x cols` buffer.
#[derive(Clone)]
pub(crate) struct Fft2 {
    rows: usize,
    cols: usize,
    row_fwd: Arc<dyn Fft<f64>>,
    row_inv: Arc<dyn Fft<f64>>,
    col_fwd: Arc<dyn Fft<f64>>,
    col_inv: Arc<dyn Fft<f64>>,
}

impl Fft2 {
    pub(crate) fn new(planner: &mut FftPlanner<f64>, rows: usize, cols: usize) -> Self {
        Self {
            rows,
            cols,
            row_fwd: planner.plan_fft_forward(cols),
            row_inv: planner.plan_fft_inverse(cols),
            col_fwd: planner.plan_fft_forward(rows),
            col_inv: planner.plan_fft_inverse(rows),
        }
    }

    pub(crate) fn forward(&self, data: &mut [Complex64]) {
        self.apply(data, &self.row_fwd, &self.col_fwd);
    }

    /// Inverse transform without the `1 / (rows * cols)` factor.
    pub(crate) fn inverse(&self, data: &mut [Complex64]) {
        self.apply(data, &self.row_inv, &self.col_inv);
    }

    fn apply(&self, data: &mut [Complex64], row: &Arc<dyn Fft<f64>>, col: &Arc<dyn Fft<f64>>) {
        debug_assert_eq!(data.len(), self.rows * self.cols);
        if self.cols > 1 {
            row.process(data);
        }
        if self.rows > 1 {
            let mut t = vec![Complex64::default(); data.len()];
            transpose(data, &mut t, self.rows, self.cols);
            col.process(&mut t);
            transpose(&t, data, self.cols, self.rows);
        }
    }
}

fn transpose(src: &[Complex64], dst: &mut [Complex64], rows: usize, cols: usize) {
    for r in 0..rows {
        for c in 0..cols {
            dst[c * rows + r] = src[r * cols + c];
        }
    }
}
