use crate::error::{OpticsError, Result};
use crate::field::Aperture;
use crate::psf::GeometryParams;
use crate::speckle::SpeckleParams;
use crate::turbulence::TurbulenceSpec;

/// Everything that defines one Monte Carlo run.
///
/// The turbulence spec supplies `cn2`; its path length and wavelength are
/// replaced per screen by the signal-arm leg (`z1` or `z2`) and `lambda_s`.
#[derive(Debug, Clone)]
pub struct ExperimentConfig {
    pub geometry: GeometryParams,
    pub speckle: SpeckleParams,
    pub turbulence: Option<TurbulenceSpec>,
    pub object: Aperture,
    pub realizations: u64,
    pub master_seed: u64,
    /// Multiply the object by an independent uniform phase per pixel and
    /// realization.
    pub rough_surface: bool,
    /// Propagate the signal over `z2` and integrate at the detector plane.
    /// When false the bucket is integrated just behind the object, which is
    /// the same number for a full-plane detector but skips two transforms.
    pub detector_propagation: bool,
}

impl ExperimentConfig {
    pub fn new(
        geometry: GeometryParams,
        speckle: SpeckleParams,
        turbulence: Option<TurbulenceSpec>,
        object: Aperture,
        realizations: u64,
        master_seed: u64,
    ) -> Result<Self> {
        let cfg = Self {
            geometry,
            speckle,
            turbulence,
            object,
            realizations,
            master_seed,
            rough_surface: false,
            detector_propagation: false,
        };
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn with_rough_surface(mut self, on: bool) -> Self {
        self.rough_surface = on;
        self
    }

    pub fn with_detector_propagation(mut self, on: bool) -> Self {
        self.detector_propagation = on;
        self
    }

    pub fn validate(&self) -> Result<()> {
        self.geometry.validate()?;
        if self.realizations < 2 {
            return Err(OpticsError::InsufficientSamples {
                needed: 2,
                have: self.realizations as usize,
            });
        }
        self.speckle.grid().check_same(&self.object.grid())?;
        Ok(())
    }

    /// Screen statistics for one signal-arm leg; `None` in vacuum.
    pub(crate) fn leg_turbulence(&self, path_length: f64) -> Result<Option<TurbulenceSpec>> {
        match self.turbulence {
            Some(t) if !t.is_vacuum() => Ok(Some(TurbulenceSpec::new(t.cn2(), path_length, self.geometry.lambda_s)?)),
            _ => Ok(None),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::field::Grid;

    fn parts() -> (GeometryParams, SpeckleParams, Aperture) {
        let grid = Grid::new(64, 1e-5).unwrap();
        let g = GeometryParams::matched(532e-9, 635e-9, 0.05, 1e-4, 3e-5).unwrap();
        let s = SpeckleParams::new(1e-4, 3e-5, grid).unwrap();
        (g, s, Aperture::ones(grid))
    }

    #[test]
    fn needs_two_realizations() {
        let (g, s, o) = parts();
        assert!(matches!(
            ExperimentConfig::new(g, s, None, o.clone(), 1, 0),
            Err(OpticsError::InsufficientSamples { .. })
        ));
        assert!(ExperimentConfig::new(g, s, None, o, 2, 0).is_ok());
    }

    #[test]
    fn object_grid_must_match() {
        let (g, s, _) = parts();
        let other = Aperture::ones(Grid::new(32, 1e-5).unwrap());
        assert!(matches!(
            ExperimentConfig::new(g, s, None, other, 10, 0),
            Err(OpticsError::ShapeMismatch { .. })
        ));
    }
}
