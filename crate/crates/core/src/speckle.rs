//! Pseudo-thermal modulator patterns.
//!
//! A pattern is `V(u) = exp(-|u|^2 / (4 omega^2)) g(u)`, where `g` is a
//! unit-variance circular complex Gaussian field with
//! `<g(u1) g*(u2)> = exp(-|u1 - u2|^2 / (2 l_c^2))`. Its two-point function is
//! therefore the Gaussian envelope times the Gaussian correlation, and all
//! higher moments follow from circular Gaussianity.

use num_complex::Complex64;

use crate::error::{OpticsError, Result};
use crate::field::{ComplexField, Grid};
use crate::random_field::GaussianFieldSynth;
use crate::rng::{keyed_rng, RealizationKey, Stream};

/// Smallest grid extent accepted, in units of `omega`.
pub const MIN_EXTENT_IN_OMEGA: f64 = 5.0;

/// Smallest correlation length accepted, in pixels.
pub const MIN_CORRELATION_PIXELS: f64 = 2.0;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SpeckleParams {
    omega: f64,
    l_c: f64,
    grid: Grid,
}

impl SpeckleParams {
    pub fn new(omega: f64, l_c: f64, grid: Grid) -> Result<Self> {
        if !(omega > 0.0 && omega.is_finite()) || !(l_c > 0.0 && l_c.is_finite()) {
            return Err(OpticsError::InvalidParams(format!(
                "omega and l_c must be positive, got omega = {omega}, l_c = {l_c}"
            )));
        }
        if l_c < MIN_CORRELATION_PIXELS * grid.pitch() {
            return Err(OpticsError::InvalidParams(format!(
                "l_c = {l_c:e} m is not resolved by pitch {:e} m (need >= {MIN_CORRELATION_PIXELS} pixels)",
                grid.pitch()
            )));
        }
        if grid.extent() < MIN_EXTENT_IN_OMEGA * omega {
            return Err(OpticsError::InvalidParams(format!(
                "grid extent {:e} m does not capture the beam envelope (need >= {MIN_EXTENT_IN_OMEGA} * omega = {:e} m)",
                grid.extent(),
                MIN_EXTENT_IN_OMEGA * omega
            )));
        }
        Ok(Self { omega, l_c, grid })
    }

    pub fn omega(&self) -> f64 {
        self.omega
    }

    pub fn l_c(&self) -> f64 {
        self.l_c
    }

    pub fn grid(&self) -> Grid {
        self.grid
    }

    /// Amplitude envelope `exp(-|u|^2 / (4 omega^2))`.
    pub fn envelope(&self, x: f64, y: f64) -> f64 {
        (-(x * x + y * y) / (4.0 * self.omega * self.omega)).exp()
    }

    /// Model two-point function `<V(u1) V*(u2)>`.
    pub fn model_correlation(&self, u1: (f64, f64), u2: (f64, f64)) -> f64 {
        let d2 = (u1.0 - u2.0).powi(2) + (u1.1 - u2.1).powi(2);
        self.envelope(u1.0, u1.1) * self.envelope(u2.0, u2.1) * (-d2 / (2.0 * self.l_c * self.l_c)).exp()
    }
}

/// Reusable generator: holds the spectral filter and the envelope.
#[derive(Debug, Clone)]
pub struct SpeckleGenerator {
    params: SpeckleParams,
    synth: GaussianFieldSynth,
    envelope: Vec<f64>,
}

impl SpeckleGenerator {
    pub fn new(params: SpeckleParams) -> Self {
        let grid = params.grid;
        let envelope = (0..grid.n())
            .map(|i| {
                let x = grid.coord(i);
                (-x * x / (4.0 * params.omega * params.omega)).exp()
            })
            .collect();
        Self {
            params,
            synth: GaussianFieldSynth::new(grid, params.l_c),
            envelope,
        }
    }

    pub fn params(&self) -> &SpeckleParams {
        &self.params
    }

    pub(crate) fn samples(&self, key: RealizationKey) -> Vec<Complex64> {
        let n = self.params.grid.n();
        let mut data = self.synth.sample(&mut keyed_rng(key, Stream::Speckle));
        for (i, row) in data.chunks_exact_mut(n).enumerate() {
            let ex = self.envelope[i];
            for (v, &ey) in row.iter_mut().zip(&self.envelope) {
                *v *= ex * ey;
            }
        }
        data
    }

    /// The pattern for `key`, illuminated by a unit-intensity beam at `wavelength`.
    pub fn generate(&self, key: RealizationKey, wavelength: f64) -> Result<ComplexField> {
        ComplexField::new(self.params.grid, wavelength, self.samples(key)).map(|f| f.with_label("slm"))
    }
}

/// One modulator pattern; a pure function of `(params, key)`.
pub fn generate_slm_field(params: &SpeckleParams, key: RealizationKey, wavelength: f64) -> Result<ComplexField> {
    SpeckleGenerator::new(*params).generate(key, wavelength)
}

/// Mergeable running mean of `V(u1) V*(u2)`.
#[derive(Debug, Clone, Copy, Default, PartialEq)]
pub struct CorrelationEstimator {
    sum: Complex64,
    count: usize,
}

impl CorrelationEstimator {
    pub fn push(&mut self, a: Complex64, b: Complex64) {
        self.sum += a * b.conj();
        self.count += 1;
    }

    pub fn merge(mut self, other: CorrelationEstimator) -> Self {
        self.sum += other.sum;
        self.count += other.count;
        self
    }

    pub fn count(&self) -> usize {
        self.count
    }

    pub fn mean(&self) -> Result<Complex64> {
        if self.count < 2 {
            return Err(OpticsError::InsufficientSamples {
                needed: 2,
                have: self.count,
            });
        }
        Ok(self.sum / self.count as f64)
    }
}

fn pixel_of(grid: Grid, u: (f64, f64)) -> Result<usize> {
    match (grid.index_of(u.0), grid.index_of(u.1)) {
        (Some(i), Some(j)) => Ok(i * grid.n() + j),
        _ => Err(OpticsError::InvalidParams(format!(
            "coordinate ({}, {}) is off the grid",
            u.0, u.1
        ))),
    }
}

/// Sample mean of `V(u1) V*(u2)` over `fields`, at the pixels nearest to
/// `u1` and `u2`.
pub fn estimate_correlation(fields: &[ComplexField], u1: (f64, f64), u2: (f64, f64)) -> Result<Complex64> {
    let first = fields.first().ok_or(OpticsError::InsufficientSamples { needed: 2, have: 0 })?;
    let grid = first.grid();
    let (p1, p2) = (pixel_of(grid, u1)?, pixel_of(grid, u2)?);
    let mut est = CorrelationEstimator::default();
    for f in fields {
        grid.check_same(&f.grid())?;
        est.push(f.samples()[p1], f.samples()[p2]);
    }
    est.mean()
}

#[cfg(test)]
mod tests {
    use super::*;

    fn params() -> SpeckleParams {
        // l_c = 4 px, omega = 20 px on a 128 grid
        SpeckleParams::new(2e-4, 4e-5, Grid::new(128, 1e-5).unwrap()).unwrap()
    }

    #[test]
    fn invalid_params_rejected() {
        let g = Grid::new(128, 1e-5).unwrap();
        assert!(SpeckleParams::new(0.0, 4e-5, g).is_err());
        assert!(SpeckleParams::new(2e-4, -1.0, g).is_err());
        assert!(SpeckleParams::new(2e-4, 1.5e-5, g).is_err(), "l_c below two pixels");
        assert!(SpeckleParams::new(3e-4, 4e-5, g).is_err(), "envelope exceeds grid");
    }

    #[test]
    fn same_key_same_field() {
        let p = params();
        let k = RealizationKey::new(11, 3);
        let a = generate_slm_field(&p, k, 532e-9).unwrap();
        let b = generate_slm_field(&p, k, 532e-9).unwrap();
        assert_eq!(a.samples(), b.samples());
        let c = generate_slm_field(&p, RealizationKey::new(11, 4), 532e-9).unwrap();
        assert_ne!(a.samples(), c.samples());
    }

    #[test]
    fn estimator_edge_cases() {
        let g = Grid::new(16, 1e-5).unwrap();
        let unit = ComplexField::from_fn(g, 5e-7, |_, _| Complex64::new(1.0, 0.0)).unwrap();
        let est = estimate_correlation(&[unit.clone(), unit.clone()], (0.0, 0.0), (0.0, 0.0)).unwrap();
        assert_eq!(est, Complex64::new(1.0, 0.0));

        assert!(matches!(
            estimate_correlation(&[], (0.0, 0.0), (0.0, 0.0)),
            Err(OpticsError::InsufficientSamples { have: 0, .. })
        ));
        assert!(matches!(
            estimate_correlation(&[unit.clone()], (0.0, 0.0), (0.0, 0.0)),
            Err(OpticsError::InsufficientSamples { have: 1, .. })
        ));
        assert!(estimate_correlation(&[unit.clone(), unit], (1.0, 0.0), (0.0, 0.0)).is_err());
    }

    #[test]
    fn estimator_is_bounded_by_envelope() {
        // unit-modulus fields with random phases, interleaved with conjugates
        let g = Grid::new(16, 1e-5).unwrap();
        let mut fields = Vec::new();
        for k in 0..50u32 {
            let ph = (k as f64 * 1.7).sin() * 3.0;
            let f = ComplexField::from_fn(g, 5e-7, |x, y| Complex64::from_polar(1.0, ph + 1e5 * (x - 2.0 * y))).unwrap();
            let conj: Vec<Complex64> = f.samples().iter().map(|c| c.conj()).collect();
            fields.push(ComplexField::new(g, 5e-7, conj).unwrap());
            fields.push(f);
        }
        let est = estimate_correlation(&fields, (2e-5, 0.0), (-3e-5, 1e-5)).unwrap();
        assert!(est.norm() <= 1.0 + 1e-12);
    }

    #[test]
    fn estimator_merge_matches_sequential() {
        let vals: Vec<Complex64> = (0..20).map(|k| Complex64::new(k as f64, 1.0 - k as f64)).collect();
        let mut seq = CorrelationEstimator::default();
        let (mut a, mut b) = (CorrelationEstimator::default(), CorrelationEstimator::default());
        for (k, w) in vals.windows(2).enumerate() {
            seq.push(w[0], w[1]);
            if k % 3 == 0 { a.push(w[0], w[1]) } else { b.push(w[0], w[1]) }
        }
        assert_eq!(a.merge(b).mean().unwrap(), seq.mean().unwrap());
    }

    #[test]
    fn central_intensity_is_unity_on_average() {
        let p = params();
        let gen = SpeckleGenerator::new(p);
        let n = p.grid().n();
        let c = n / 2 * n + n / 2;
        let m = 10_000u64;
        let sum: f64 = (0..m)
            .map(|i| gen.samples(RealizationKey::new(1, i))[c].norm_sqr())
            .sum();
        let mean = sum / m as f64;
        assert!((mean - 1.0).abs() < 0.05, "<|V(0)|^2> = {mean}");
    }

    #[test]
    fn correlation_at_one_length_matches_model() {
        let p = params();
        let gen = SpeckleGenerator::new(p);
        let g = p.grid();
        let n = g.n();
        // average over a handful of near-axis pairs separated by l_c (4 px)
        let pairs: Vec<(usize, usize)> = (-2i64..=2)
            .flat_map(|a| (-2i64..=2).map(move |b| (a, b)))
            .map(|(a, b)| {
                let i = (n as i64 / 2 + 4 * a) as usize;
                let j = (n as i64 / 2 + 8 * b) as usize;
                (i * n + j, (i + 4) * n + j)
            })
            .collect();
        let mut est = vec![CorrelationEstimator::default(); pairs.len()];
        for k in 0..10_000u64 {
            let v = gen.samples(RealizationKey::new(2, k));
            for (e, &(p1, p2)) in est.iter_mut().zip(&pairs) {
                e.push(v[p1], v[p2]);
            }
        }
        let mut rel = 0.0;
        for (e, &(p1, p2)) in est.iter().zip(&pairs) {
            let u = |p: usize| (g.coord(p / n), g.coord(p % n));
            rel += e.mean().unwrap().re / p.model_correlation(u(p1), u(p2));
        }
        let ratio = rel / pairs.len() as f64;
        assert!((ratio - 1.0).abs() < 0.05, "ratio = {ratio}");
    }
}
