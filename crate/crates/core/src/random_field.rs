//! Spectral synthesis of stationary circular complex Gaussian random fields
//! with a separable Gaussian covariance on a periodic grid.

use std::f64::consts::PI;

use num_complex::Complex64;
use rand::Rng;
use rand_distr::StandardNormal;

use crate::fft::{fft2, signed_bin};
use crate::field::Grid;

/// Per-axis spectral amplitudes below this fraction of the peak are dropped.
const FILTER_CUTOFF: f64 = 1e-9;

/// Separable spectral filter whose synthesized field has covariance
/// `<g(u) g*(u + d)> = exp(-|d|^2 / (2 corr^2))` (periodized on the grid,
/// normalized at zero lag)
/// and unit variance.
#[derive(Debug, Clone)]
pub(crate) struct GaussianFieldSynth {
    n: usize,
    amplitude: Vec<f64>,
    // Contiguous window of non-negligible bins, in signed-bin order, wrapped.
    support: Vec<usize>,
}

impl GaussianFieldSynth {
    pub(crate) fn new(grid: Grid, correlation_length: f64) -> Self {
        let n = grid.n();
        // Gaussian spectrum sampled on the DFT frequencies: by Poisson
        // summation this is the transform of the periodized correlation, so
        // it is positive and smooth even when the correlation wraps.
        let df = 1.0 / grid.extent();
        let q = 2.0 * PI * PI * correlation_length * correlation_length;
        let power: Vec<f64> = (0..n)
            .map(|k| {
                let f = signed_bin(k, n) as f64 * df;
                (-q * f * f).exp()
            })
            .collect();
        let total: f64 = power.iter().sum();
        let amplitude: Vec<f64> = power.iter().map(|p| (p / total).sqrt()).collect();
        let peak = amplitude.iter().cloned().fold(0.0, f64::max);
        let support = (0..n)
            .filter(|&k| amplitude[k] >= FILTER_CUTOFF * peak)
            .collect();
        Self { n, amplitude, support }
    }

    /// One realization of the unit-variance field.
    ///
    /// Draws one standard complex normal per retained frequency bin, in a
    /// fixed order, so the output is a pure function of the generator state.
    pub(crate) fn sample<R: Rng>(&self, rng: &mut R) -> Vec<Complex64> {
        let n = self.n;
        let mut data = vec![Complex64::new(0.0, 0.0); n * n];
        let scale = std::f64::consts::FRAC_1_SQRT_2;
        for &kx in &self.support {
            let ax = self.amplitude[kx] * scale;
            let row = &mut data[kx * n..(kx + 1) * n];
            for &ky in &self.support {
                let re: f64 = rng.sample(StandardNormal);
                let im: f64 = rng.sample(StandardNormal);
                row[ky] = Complex64::new(re, im) * (ax * self.amplitude[ky]);
            }
        }
        fft2(n).inverse_unnormalized_transposed_sparse(&mut data, &self.support);
        data
    }
}
