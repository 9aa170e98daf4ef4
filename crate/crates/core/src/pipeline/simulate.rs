use num_complex::Complex64;
use rand::Rng;

use super::config::ExperimentConfig;
use crate::error::{OpticsError, Result};
use crate::field::{Grid, RealMap};
use crate::propagation::{forward_spectrum, AngularSpectrum};
use crate::rng::{keyed_rng, RealizationKey, Stream};
use crate::speckle::SpeckleGenerator;
use crate::turbulence::PhaseScreenGenerator;

/// Outputs of one realization.
#[derive(Debug, Clone, PartialEq)]
pub struct Realization {
    pub bucket: f64,
    pub reference: RealMap,
}

/// Precomputed operators for one configuration. Realizations are pure
/// functions of `(config, index)`.
#[derive(Debug, Clone)]
pub struct Simulator {
    grid: Grid,
    master_seed: u64,
    realizations: u64,
    speckle: SpeckleGenerator,
    signal: AngularSpectrum,
    detector: Option<AngularSpectrum>,
    reference: AngularSpectrum,
    source_screens: Option<PhaseScreenGenerator>,
    object_screens: Option<PhaseScreenGenerator>,
    // nonzero object pixels and their transmissions
    support: Vec<(usize, Complex64)>,
    rough_surface: bool,
}

impl Simulator {
    pub fn new(config: &ExperimentConfig) -> Result<Self> {
        config.validate()?;
        let g = &config.geometry;
        let grid = config.speckle.grid();
        let signal = AngularSpectrum::new(grid, g.lambda_s, g.z1)?;
        let reference = AngularSpectrum::new(grid, g.lambda_r, g.z3)?;
        let detector = if config.detector_propagation {
            Some(AngularSpectrum::new(grid, g.lambda_s, g.z2)?)
        } else {
            None
        };
        let source_screens = config
            .leg_turbulence(g.z1)?
            .map(|t| PhaseScreenGenerator::new(&t, grid))
            .transpose()?;
        // phase-only and applied where the bucket no longer resolves
        // position, so only needed when the detector leg is simulated
        let object_screens = if config.detector_propagation {
            config
                .leg_turbulence(g.z2)?
                .map(|t| PhaseScreenGenerator::new(&t, grid))
                .transpose()?
        } else {
            None
        };
        let support = config
            .object
            .samples()
            .iter()
            .enumerate()
            .filter(|(_, t)| t.norm_sqr() > 0.0)
            .map(|(i, &t)| (i, t))
            .collect();
        Ok(Self {
            grid,
            master_seed: config.master_seed,
            realizations: config.realizations,
            speckle: SpeckleGenerator::new(config.speckle),
            signal,
            detector,
            reference,
            source_screens,
            object_screens,
            support,
            rough_surface: config.rough_surface,
        })
    }

    pub fn grid(&self) -> Grid {
        self.grid
    }

    pub fn realizations(&self) -> u64 {
        self.realizations
    }

    /// Bucket value and reference intensity of realization `index`, the
    /// intensity written into `reference` (resized as needed).
    pub(crate) fn run_into(&self, index: u64, reference: &mut Vec<Complex64>) -> Result<f64> {
        if index >= self.realizations {
            return Err(OpticsError::InvalidParams(format!(
                "realization index {index} out of range (0..{})",
                self.realizations
            )));
        }
        let n = self.grid.n();
        let key = RealizationKey::new(self.master_seed, index);
        let slm = self.speckle.samples(key);

        // Both arms share V. Without a source screen they also share its
        // spectrum.
        *reference = slm;
        let mut signal = match &self.source_screens {
            Some(screens) => {
                let mut s = reference.clone();
                screens.generate_pair(key).0.apply_in_place(&mut s);
                forward_spectrum(&mut s, n);
                forward_spectrum(reference, n);
                s
            }
            None => {
                forward_spectrum(reference, n);
                reference.clone()
            }
        };
        self.signal.finish_from_spectrum(&mut signal)?;
        self.reference.finish_from_spectrum(reference)?;

        let bucket = match &self.detector {
            None => self.support.iter().map(|&(i, t)| (signal[i] * t).norm_sqr()).sum::<f64>(),
            Some(detector) => {
                let mut obj = vec![Complex64::new(0.0, 0.0); n * n];
                let mut rng = keyed_rng(key, Stream::RoughSurface);
                for &(i, t) in &self.support {
                    let mut v = signal[i] * t;
                    if self.rough_surface {
                        v *= Complex64::cis(rng.random_range(0.0..std::f64::consts::TAU));
                    }
                    obj[i] = v;
                }
                if let Some(screens) = &self.object_screens {
                    screens.generate_pair_on(key, Stream::ScreenDetector).0.apply_in_place(&mut obj);
                }
                forward_spectrum(&mut obj, n);
                detector.finish_from_spectrum(&mut obj)?;
                obj.iter().map(|c| c.norm_sqr()).sum::<f64>()
            }
        };
        Ok(bucket * self.grid.pixel_area())
    }

    pub fn realization(&self, index: u64) -> Result<Realization> {
        let mut buf = Vec::new();
        let bucket = self.run_into(index, &mut buf)?;
        let values = buf.into_iter().map(|c| c.norm_sqr()).collect();
        Ok(Realization {
            bucket,
            reference: RealMap::new(self.grid, values)?,
        })
    }
}

/// One realization of `config`; builds the operators on every call, so use
/// [`Simulator`] for loops.
pub fn simulate_realization(config: &ExperimentConfig, index: u64) -> Result<Realization> {
    Simulator::new(config)?.realization(index)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::field::Aperture;
    use crate::propagation::propagate;
    use crate::psf::GeometryParams;
    use crate::speckle::{generate_slm_field, SpeckleParams};
    use crate::turbulence::TurbulenceSpec;

    fn small(object: fn(Grid) -> Aperture, cn2: f64) -> ExperimentConfig {
        let grid = Grid::new(64, 1e-5).unwrap();
        let g = GeometryParams::matched(532e-9, 635e-9, 0.02, 1e-4, 3e-5).unwrap();
        let s = SpeckleParams::new(1e-4, 3e-5, grid).unwrap();
        let t = TurbulenceSpec::new(cn2, 0.02, 532e-9).unwrap();
        ExperimentConfig::new(g, s, Some(t), object(grid), 8, 11).unwrap()
    }

    #[test]
    fn zero_object_has_zero_bucket() {
        let cfg = small(Aperture::zeros, 0.0);
        let sim = Simulator::new(&cfg).unwrap();
        for k in 0..4 {
            assert_eq!(sim.realization(k).unwrap().bucket, 0.0);
        }
    }

    #[test]
    fn open_object_bucket_is_propagated_power() {
        let cfg = small(Aperture::ones, 0.0);
        let sim = Simulator::new(&cfg).unwrap();
        let key = RealizationKey::new(cfg.master_seed, 3);
        let v = generate_slm_field(&cfg.speckle, key, 532e-9).unwrap();
        let expected = propagate(&v, cfg.geometry.z1).unwrap().power();
        let got = sim.realization(3).unwrap().bucket;
        assert!((got / expected - 1.0).abs() < 1e-12);
        assert!((got / v.power() - 1.0).abs() < 1e-10);
    }

    #[test]
    fn reference_is_vacuum_propagation_at_reference_wavelength() {
        let cfg = small(Aperture::ones, 0.0);
        let key = RealizationKey::new(cfg.master_seed, 5);
        let v = generate_slm_field(&cfg.speckle, key, 635e-9).unwrap();
        let expected = propagate(&v, cfg.geometry.z3).unwrap().intensity();
        let got = simulate_realization(&cfg, 5).unwrap().reference;
        for (a, b) in got.values().iter().zip(expected.values()) {
            assert!((a - b).abs() <= 1e-12 * b.abs().max(1e-3));
        }
    }

    #[test]
    fn deterministic_per_index() {
        let cfg = small(|g| Aperture::disk(g, 1e-4).unwrap(), 1e-5);
        let sim = Simulator::new(&cfg).unwrap();
        assert_eq!(sim.realization(2).unwrap(), sim.realization(2).unwrap());
        assert_ne!(sim.realization(2).unwrap().bucket, sim.realization(3).unwrap().bucket);
        assert!(sim.realization(8).is_err());
    }

    #[test]
    fn reference_independent_of_turbulence() {
        let disk = |g| Aperture::disk(g, 1e-4).unwrap();
        let vac = Simulator::new(&small(disk, 0.0)).unwrap();
        let turb = Simulator::new(&small(disk, 1e-5)).unwrap();
        for k in 0..4 {
            let (a, b) = (vac.realization(k).unwrap(), turb.realization(k).unwrap());
            assert_eq!(a.reference.values(), b.reference.values());
            assert_ne!(a.bucket, b.bucket);
        }
    }

    #[test]
    fn detector_leg_preserves_bucket() {
        // a phase-only object-plane screen and a unitary z2 leave total power
        // unchanged; the object is apodized so its spectrum stays in band
        let soft = |g| Aperture::from_fn(g, |x, y| Complex64::new((-(x * x + y * y) / 1.28e-8).exp(), 0.0)).unwrap();
        let base = small(soft, 1e-5);
        let short = Simulator::new(&base).unwrap();
        let full = Simulator::new(&base.clone().with_detector_propagation(true)).unwrap();
        for k in 0..4 {
            let (a, b) = (short.realization(k).unwrap(), full.realization(k).unwrap());
            assert!((a.bucket / b.bucket - 1.0).abs() < 1e-10);
            assert_eq!(a.reference, b.reference);
        }
    }

    #[test]
    fn rough_surface_cannot_reach_the_detector() {
        // a delta-correlated phase scatters into every grid frequency
        let disk = |g| Aperture::disk(g, 1.5e-4).unwrap();
        let rough = small(disk, 0.0).with_detector_propagation(true).with_rough_surface(true);
        let err = simulate_realization(&rough, 0).unwrap_err();
        assert!(matches!(err, OpticsError::SamplingViolation { .. }));
        // the object-plane bucket does not depend on the surface phase
        let plain = small(disk, 0.0);
        let a = simulate_realization(&plain.clone().with_rough_surface(true), 1).unwrap();
        assert_eq!(a, simulate_realization(&plain, 1).unwrap());
    }

    #[test]
    fn sampling_violation_surfaces() {
        // a 64 x 10 um grid cannot carry 50 m of propagation
        let grid = Grid::new(64, 1e-5).unwrap();
        let g = GeometryParams::matched(532e-9, 635e-9, 50.0, 1e-4, 3e-5).unwrap();
        let s = SpeckleParams::new(1e-4, 3e-5, grid).unwrap();
        let cfg = ExperimentConfig::new(g, s, None, Aperture::ones(grid), 4, 0).unwrap();
        let err = simulate_realization(&cfg, 0).unwrap_err();
        assert!(matches!(err, OpticsError::SamplingViolation { .. }), "{err}");
    }
}
