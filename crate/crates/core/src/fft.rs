//! Square 2-D FFTs on row-major buffers.
//!
//! Propagation only ever needs `inverse(H * forward(E))`, so the forward
//! transform leaves its spectrum transposed and the inverse undoes that. This
//! saves two of the four transposes a layout-preserving round trip costs.

use std::collections::HashMap;
use std::sync::{Arc, Mutex, OnceLock};

use num_complex::Complex64;
use rustfft::{Fft, FftPlanner};

pub(crate) struct Fft2 {
    n: usize,
    forward: Arc<dyn Fft<f64>>,
    inverse: Arc<dyn Fft<f64>>,
}

/// Shared, planned transform for an `n x n` grid.
pub(crate) fn fft2(n: usize) -> Arc<Fft2> {
    static CACHE: OnceLock<Mutex<HashMap<usize, Arc<Fft2>>>> = OnceLock::new();
    let cache = CACHE.get_or_init(|| Mutex::new(HashMap::new()));
    let mut map = cache.lock().expect("fft cache poisoned");
    map.entry(n)
        .or_insert_with(|| {
            let mut planner = FftPlanner::new();
            Arc::new(Fft2 {
                n,
                forward: planner.plan_fft_forward(n),
                inverse: planner.plan_fft_inverse(n),
            })
        })
        .clone()
}

impl Fft2 {
    fn rows(&self, fft: &Arc<dyn Fft<f64>>, data: &mut [Complex64]) {
        let mut scratch = vec![Complex64::new(0.0, 0.0); fft.get_inplace_scratch_len()];
        fft.process_with_scratch(data, &mut scratch);
    }

    /// Unnormalized forward transform; on return `data[kx * n + ky]` is
    /// stored as `data[ky * n + kx]`.
    pub(crate) fn forward_transposed(&self, data: &mut [Complex64]) {
        debug_assert_eq!(data.len(), self.n * self.n);
        self.rows(&self.forward, data);
        transpose_in_place(data, self.n);
        self.rows(&self.forward, data);
    }

    /// Inverse of [`Self::forward_transposed`], normalized by `1/n^2`.
    pub(crate) fn inverse_from_transposed(&self, data: &mut [Complex64]) {
        debug_assert_eq!(data.len(), self.n * self.n);
        self.rows(&self.inverse, data);
        transpose_in_place(data, self.n);
        self.rows(&self.inverse, data);
        let scale = 1.0 / (self.n * self.n) as f64;
        data.iter_mut().for_each(|c| *c *= scale);
    }

    /// Unnormalized inverse transform of a spectrum given in natural layout,
    /// returned transposed. Rows not listed in `nonzero_rows` must be zero and
    /// are skipped. Used by random-field synthesis, where the transposed
    /// realization is statistically identical to the plain one.
    pub(crate) fn inverse_unnormalized_transposed_sparse(&self, data: &mut [Complex64], nonzero_rows: &[usize]) {
        let n = self.n;
        let mut scratch = vec![Complex64::new(0.0, 0.0); self.inverse.get_inplace_scratch_len()];
        for &r in nonzero_rows {
            self.inverse
                .process_with_scratch(&mut data[r * n..(r + 1) * n], &mut scratch);
        }
        transpose_in_place(data, n);
        self.rows(&self.inverse, data);
    }

    /// Layout-preserving unnormalized forward transform.
    #[cfg(test)]
    pub(crate) fn forward(&self, data: &mut [Complex64]) {
        self.forward_transposed(data);
        transpose_in_place(data, self.n);
    }
}

/// Signed frequency index of FFT bin `k` on an `n`-point transform.
#[inline]
pub(crate) fn signed_bin(k: usize, n: usize) -> i64 {
    if k < n / 2 {
        k as i64
    } else {
        k as i64 - n as i64
    }
}

const BLOCK: usize = 32;

pub(crate) fn transpose_in_place<T: Copy>(data: &mut [T], n: usize) {
    for bi in (0..n).step_by(BLOCK) {
        for bj in (bi..n).step_by(BLOCK) {
            let i_end = (bi + BLOCK).min(n);
            let j_end = (bj + BLOCK).min(n);
            for i in bi..i_end {
                let j_start = if bi == bj { i + 1 } else { bj };
                for j in j_start..j_end {
                    data.swap(i * n + j, j * n + i);
                }
            }
        }
    }
}
