//! Orthonormal 3D group transform: 2D DCT-II on each patch, then a Haar
//! transform along the stack.
//!
//! The stack transform is the generalized (unbalanced) Haar basis: a
//! constant row, then for every segment split into halves of sizes
//! `ceil(len/2)` and `floor(len/2)` a difference row, listed breadth first.
//! For power-of-two stacks this is the ordinary multilevel Haar transform.

use ndarray::Array2;

/// Orthonormal `n x n` DCT-II matrix.
pub fn dct_matrix(n: usize) -> Array2<f64> {
    let nf = n as f64;
    Array2::from_shape_fn((n, n), |(k, i)| {
        let scale = if k == 0 { (1.0 / nf).sqrt() } else { (2.0 / nf).sqrt() };
        scale * (std::f64::consts::PI * (i as f64 + 0.5) * k as f64 / nf).cos()
    })
}

/// Orthonormal `n x n` unbalanced Haar matrix.
pub fn haar_matrix(n: usize) -> Array2<f64> {
    let mut m = Array2::zeros((n, n));
    if n == 0 {
        return m;
    }
    let inv = 1.0 / (n as f64).sqrt();
    m.row_mut(0).fill(inv);
    let mut queue = std::collections::VecDeque::from([(0usize, n)]);
    let mut row = 1;
    while let Some((start, len)) = queue.pop_front() {
        if len < 2 {
            continue;
        }
        let n1 = len.div_ceil(2);
        let n2 = len - n1;
        let norm = ((n1 * n2) as f64 / len as f64).sqrt();
        for i in 0..n1 {
            m[[row, start + i]] = norm / n1 as f64;
        }
        for i in 0..n2 {
            m[[row, start + n1 + i]] = -norm / n2 as f64;
        }
        row += 1;
        queue.push_back((start, n1));
        queue.push_back((start + n1, n2));
    }
    m
}

/// `T3D` for stacks of `count` square patches of side `patch`.
///
/// Stacks and coefficient slices are laid out member-major: element
/// `m * patch^2 + r * patch + c`. Coefficients use the same layout with the
/// Haar index in place of the member index.
#[derive(Debug, Clone)]
pub struct GroupTransform {
    patch: usize,
    count: usize,
    dct: Array2<f64>,
    haar: Array2<f64>,
}

impl GroupTransform {
    pub fn new(patch: usize, count: usize) -> Self {
        Self {
            patch,
            count,
            dct: dct_matrix(patch),
            haar: haar_matrix(count),
        }
    }

    pub fn patch(&self) -> usize {
        self.patch
    }

    pub fn count(&self) -> usize {
        self.count
    }

    /// Number of values in one stack.
    pub fn len(&self) -> usize {
        self.patch * self.patch * self.count
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    fn patch_2d(&self, src: &[f64], dst: &mut [f64], transpose: bool) {
        // dst = D src D^T (forward) or D^T src D (inverse)
        let p = self.patch;
        let d = |a: usize, b: usize| if transpose { self.dct[[b, a]] } else { self.dct[[a, b]] };
        let mut tmp = vec![0.0; p * p];
        for r in 0..p {
            for c in 0..p {
                tmp[r * p + c] = (0..p).map(|k| src[r * p + k] * d(c, k)).sum();
            }
        }
        for r in 0..p {
            for c in 0..p {
                dst[r * p + c] = (0..p).map(|k| d(r, k) * tmp[k * p + c]).sum();
            }
        }
    }

    fn stack_1d(&self, src: &[f64], dst: &mut [f64], transpose: bool) {
        let bp = self.patch * self.patch;
        dst.iter_mut().for_each(|v| *v = 0.0);
        for k in 0..self.count {
            for m in 0..self.count {
                let h = if transpose { self.haar[[m, k]] } else { self.haar[[k, m]] };
                if h == 0.0 {
                    continue;
                }
                let (out, inp) = (&mut dst[k * bp..(k + 1) * bp], &src[m * bp..(m + 1) * bp]);
                out.iter_mut().zip(inp).for_each(|(o, i)| *o += h * i);
            }
        }
    }

    pub fn forward(&self, stack: &[f64]) -> Vec<f64> {
        assert_eq!(stack.len(), self.len(), "stack size");
        let bp = self.patch * self.patch;
        let mut spatial = vec![0.0; stack.len()];
        for (src, dst) in stack.chunks(bp).zip(spatial.chunks_mut(bp)) {
            self.patch_2d(src, dst, false);
        }
        let mut out = vec![0.0; stack.len()];
        self.stack_1d(&spatial, &mut out, false);
        out
    }

    pub fn inverse(&self, coeffs: &[f64]) -> Vec<f64> {
        assert_eq!(coeffs.len(), self.len(), "coefficient size");
        let bp = self.patch * self.patch;
        let mut spatial = vec![0.0; coeffs.len()];
        self.stack_1d(coeffs, &mut spatial, true);
        let mut out = vec![0.0; coeffs.len()];
        for (src, dst) in spatial.chunks(bp).zip(out.chunks_mut(bp)) {
            self.patch_2d(src, dst, true);
        }
        out
    }
}
