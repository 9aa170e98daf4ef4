//! Turbulence on the signal path: coherence length and random phase screens.
//!
//! Screens are Gaussian-correlated phase fields with variance
//! [`SCREEN_PHASE_VARIANCE`] and correlation length `sigma * rho`. For
//! separations well below that length the phase structure function is
//! `sigma^2 d^2 / r^2 = d^2 / rho^2`, so the mutual coherence of `exp(i phi)` is
//! `exp(-d^2 / (2 rho^2))`, the same Gaussian coherence the closed-form PSF
//! assumes.

use std::f64::consts::PI;

use num_complex::Complex64;

use crate::error::{OpticsError, Result};
use crate::field::{ComplexField, Grid};
use crate::random_field::GaussianFieldSynth;
use crate::rng::{keyed_rng, RealizationKey, Stream};

/// Phase variance of generated screens, in rad^2.
pub const SCREEN_PHASE_VARIANCE: f64 = 25.0;

/// Structure constant, path length and wavelength of one turbulent path.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TurbulenceSpec {
    cn2: f64,
    path_length: f64,
    wavelength: f64,
}

impl TurbulenceSpec {
    /// `cn2 = 0` denotes vacuum.
    pub fn new(cn2: f64, path_length: f64, wavelength: f64) -> Result<Self> {
        if !(cn2 >= 0.0 && cn2.is_finite()) {
            return Err(OpticsError::InvalidParams(format!("cn2 must be >= 0, got {cn2}")));
        }
        if !(path_length > 0.0 && path_length.is_finite()) || !(wavelength > 0.0 && wavelength.is_finite()) {
            return Err(OpticsError::InvalidParams(format!(
                "path length and wavelength must be positive, got {path_length}, {wavelength}"
            )));
        }
        Ok(Self {
            cn2,
            path_length,
            wavelength,
        })
    }

    pub fn vacuum(path_length: f64, wavelength: f64) -> Result<Self> {
        Self::new(0.0, path_length, wavelength)
    }

    pub fn cn2(&self) -> f64 {
        self.cn2
    }

    pub fn path_length(&self) -> f64 {
        self.path_length
    }

    pub fn wavelength(&self) -> f64 {
        self.wavelength
    }

    pub fn is_vacuum(&self) -> bool {
        self.cn2 == 0.0
    }

    pub fn with_wavelength(self, wavelength: f64) -> Result<Self> {
        Self::new(self.cn2, self.path_length, wavelength)
    }

    pub fn with_path_length(self, path_length: f64) -> Result<Self> {
        Self::new(self.cn2, path_length, self.wavelength)
    }

    pub fn coherence_length(&self) -> f64 {
        coherence_length(self)
    }

    /// Structure constant giving coherence length `rho` on this path and
    /// wavelength; the inverse of [`coherence_length`].
    pub fn cn2_for_coherence_length(rho: f64, path_length: f64, wavelength: f64) -> f64 {
        let k = 2.0 * PI / wavelength;
        rho.powf(-5.0 / 3.0) / (0.55 * k * k * path_length)
    }
}

/// `rho = (0.55 cn2 k^2 z)^(-3/5)` with `k = 2 pi / lambda`; `+inf` in vacuum.
pub fn coherence_length(spec: &TurbulenceSpec) -> f64 {
    if spec.is_vacuum() {
        return f64::INFINITY;
    }
    let k = 2.0 * PI / spec.wavelength;
    (0.55 * spec.cn2 * k * k * spec.path_length).powf(-0.6)
}

/// Real phase map in radians.
#[derive(Debug, Clone, PartialEq)]
pub struct PhaseScreen {
    grid: Grid,
    phase: Vec<f64>,
}

impl PhaseScreen {
    pub fn new(grid: Grid, phase: Vec<f64>) -> Result<Self> {
        if phase.len() != grid.len() {
            return Err(OpticsError::InvalidParams(format!(
                "screen expects {} samples, got {}",
                grid.len(),
                phase.len()
            )));
        }
        if phase.iter().any(|p| !p.is_finite()) {
            return Err(OpticsError::InvalidParams("screen has non-finite phase".into()));
        }
        Ok(Self { grid, phase })
    }

    pub fn zero(grid: Grid) -> Self {
        Self {
            grid,
            phase: vec![0.0; grid.len()],
        }
    }

    pub fn grid(&self) -> Grid {
        self.grid
    }

    pub fn phase(&self) -> &[f64] {
        &self.phase
    }

    pub fn is_zero(&self) -> bool {
        self.phase.iter().all(|&p| p == 0.0)
    }

    pub(crate) fn apply_in_place(&self, samples: &mut [Complex64]) {
        for (e, &p) in samples.iter_mut().zip(&self.phase) {
            *e *= Complex64::cis(p);
        }
    }
}

/// Reusable screen generator for one path and grid.
#[derive(Debug, Clone)]
pub struct PhaseScreenGenerator {
    grid: Grid,
    rho: f64,
    synth: Option<GaussianFieldSynth>,
}

impl PhaseScreenGenerator {
    pub fn new(spec: &TurbulenceSpec, grid: Grid) -> Result<Self> {
        let rho = coherence_length(spec);
        if spec.is_vacuum() {
            return Ok(Self { grid, rho, synth: None });
        }
        if rho < 2.0 * grid.pitch() {
            return Err(OpticsError::Unresolvable {
                rho,
                pitch: grid.pitch(),
            });
        }
        let correlation = SCREEN_PHASE_VARIANCE.sqrt() * rho;
        Ok(Self {
            grid,
            rho,
            synth: Some(GaussianFieldSynth::new(grid, correlation)),
        })
    }

    pub fn coherence_length(&self) -> f64 {
        self.rho
    }

    /// Two independent screens from one complex draw (real and imaginary
    /// parts of a circular field are independent).
    pub fn generate_pair(&self, key: RealizationKey) -> (PhaseScreen, PhaseScreen) {
        self.generate_pair_on(key, Stream::ScreenSource)
    }

    pub(crate) fn generate_pair_on(&self, key: RealizationKey, stream: Stream) -> (PhaseScreen, PhaseScreen) {
        let Some(synth) = &self.synth else {
            return (PhaseScreen::zero(self.grid), PhaseScreen::zero(self.grid));
        };
        let g = synth.sample(&mut keyed_rng(key, stream));
        // each part has variance 1/2
        let scale = (2.0 * SCREEN_PHASE_VARIANCE).sqrt();
        let first = g.iter().map(|c| c.re * scale).collect();
        let second = g.iter().map(|c| c.im * scale).collect();
        (
            PhaseScreen { grid: self.grid, phase: first },
            PhaseScreen { grid: self.grid, phase: second },
        )
    }

    pub fn generate(&self, key: RealizationKey) -> PhaseScreen {
        self.generate_pair(key).0
    }
}

/// One screen for `spec` on `grid`; a pure function of the key.
pub fn generate_phase_screen(spec: &TurbulenceSpec, grid: Grid, key: RealizationKey) -> Result<PhaseScreen> {
    Ok(PhaseScreenGenerator::new(spec, grid)?.generate(key))
}

/// Pointwise multiplication by `exp(i phi)`.
pub fn apply_screen(field: &ComplexField, screen: &PhaseScreen) -> Result<ComplexField> {
    field.grid().check_same(&screen.grid)?;
    let mut out = field.clone();
    screen.apply_in_place(out.samples_mut());
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn vacuum_coherence_is_infinite() {
        let s = TurbulenceSpec::new(0.0, 1000.0, 800e-9).unwrap();
        assert_eq!(coherence_length(&s), f64::INFINITY);
    }

    #[test]
    fn coherence_length_examples() {
        // independent evaluation: k = 2 pi / 800 nm = 7.853982e6
        let k: f64 = 7.853981633974483e6;
        let weak = (0.55 * 1e-15 * k * k * 1000.0f64).powf(-0.6);
        let strong = (0.55 * 1e-12 * k * k * 1000.0f64).powf(-0.6);
        let rho_w = coherence_length(&TurbulenceSpec::new(1e-15, 1000.0, 800e-9).unwrap());
        let rho_s = coherence_length(&TurbulenceSpec::new(1e-12, 1000.0, 800e-9).unwrap());
        assert!((rho_w / weak - 1.0).abs() < 1e-12);
        assert!((rho_s / strong - 1.0).abs() < 1e-12);
        assert!((rho_w - 0.1207).abs() < 5e-5, "rho = {rho_w}");
        assert!((rho_s - 1.91e-3).abs() < 5e-6, "rho = {rho_s}");
    }

    #[test]
    fn coherence_length_is_monotone() {
        let rho = |c, z, l| coherence_length(&TurbulenceSpec::new(c, z, l).unwrap());
        assert!(rho(1e-14, 1000.0, 800e-9) < rho(1e-15, 1000.0, 800e-9));
        assert!(rho(1e-14, 2000.0, 800e-9) < rho(1e-14, 1000.0, 800e-9));
        assert!(rho(1e-14, 1000.0, 400e-9) < rho(1e-14, 1000.0, 800e-9));
    }

    #[test]
    fn cn2_inverse_round_trips() {
        let cn2 = TurbulenceSpec::cn2_for_coherence_length(1e-4, 0.5, 532e-9);
        let rho = coherence_length(&TurbulenceSpec::new(cn2, 0.5, 532e-9).unwrap());
        assert!((rho / 1e-4 - 1.0).abs() < 1e-12);
    }

    #[test]
    fn invalid_specs_rejected() {
        assert!(TurbulenceSpec::new(-1e-15, 1.0, 5e-7).is_err());
        assert!(TurbulenceSpec::new(1e-15, 0.0, 5e-7).is_err());
        assert!(TurbulenceSpec::new(1e-15, 1.0, 0.0).is_err());
    }

    #[test]
    fn vacuum_screen_is_zero() {
        let g = Grid::new(32, 1e-5).unwrap();
        let s = generate_phase_screen(&TurbulenceSpec::vacuum(0.5, 532e-9).unwrap(), g, RealizationKey::new(1, 2)).unwrap();
        assert!(s.is_zero());
    }

    #[test]
    fn unresolvable_screen_rejected() {
        let g = Grid::new(32, 1e-5).unwrap();
        let cn2 = TurbulenceSpec::cn2_for_coherence_length(1.5e-5, 0.5, 532e-9);
        let spec = TurbulenceSpec::new(cn2, 0.5, 532e-9).unwrap();
        assert!(matches!(
            generate_phase_screen(&spec, g, RealizationKey::new(0, 0)),
            Err(OpticsError::Unresolvable { .. })
        ));
    }

    #[test]
    fn screens_are_deterministic_and_independent() {
        let g = Grid::new(64, 1e-5).unwrap();
        let cn2 = TurbulenceSpec::cn2_for_coherence_length(5e-5, 0.5, 532e-9);
        let spec = TurbulenceSpec::new(cn2, 0.5, 532e-9).unwrap();
        let k = RealizationKey::new(9, 1);
        let a = generate_phase_screen(&spec, g, k).unwrap();
        assert_eq!(a, generate_phase_screen(&spec, g, k).unwrap());
        let (p, q) = PhaseScreenGenerator::new(&spec, g).unwrap().generate_pair(k);
        assert_eq!(p, a);
        assert_ne!(p, q);
        assert!(a.phase().iter().all(|v| v.is_finite()));
    }

    #[test]
    fn apply_screen_examples() {
        let g = Grid::new(16, 1e-5).unwrap();
        let f = ComplexField::from_fn(g, 5e-7, |x, y| Complex64::new(1.0 + x * 1e4, y * 3e4)).unwrap();
        assert_eq!(apply_screen(&f, &PhaseScreen::zero(g)).unwrap(), f);

        let pi = PhaseScreen::new(g, vec![PI; g.len()]).unwrap();
        let neg = apply_screen(&f, &pi).unwrap();
        for (a, b) in neg.samples().iter().zip(f.samples()) {
            assert!((a + b).norm() < 1e-12);
        }

        let wild = PhaseScreen::new(g, (0..g.len()).map(|k| (k as f64 * 0.77).sin() * 40.0).collect()).unwrap();
        let out = apply_screen(&f, &wild).unwrap();
        assert!((out.power() / f.power() - 1.0).abs() < 1e-12);
        for (a, b) in out.samples().iter().zip(f.samples()) {
            assert!((a.norm() - b.norm()).abs() < 1e-12);
        }
    }

    #[test]
    fn mutual_coherence_at_rho() {
        let g = Grid::new(128, 1e-5).unwrap();
        let rho = 8e-5; // 8 px; screen correlation length 40 px
        let cn2 = TurbulenceSpec::cn2_for_coherence_length(rho, 0.5, 532e-9);
        let spec = TurbulenceSpec::new(cn2, 0.5, 532e-9).unwrap();
        let gen = PhaseScreenGenerator::new(&spec, g).unwrap();
        let n = g.n();
        let (p1, p2) = (n / 2 * n + n / 2, n / 2 * n + n / 2 + 8);
        let mut acc = Complex64::new(0.0, 0.0);
        let m = 10_000u64;
        for k in 0..m {
            let s = gen.generate(RealizationKey::new(4, k));
            acc += Complex64::cis(s.phase()[p1] - s.phase()[p2]);
        }
        let coh = (acc / m as f64).norm();
        let expected = (-0.5f64).exp();
        assert!((coh / expected - 1.0).abs() < 0.10, "coherence = {coh}");
    }
}
