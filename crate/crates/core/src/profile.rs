//! The desk-scale experiment shipped as the default configuration.

use crate::error::Result;
use crate::field::Grid;
use crate::psf::GeometryParams;
use crate::speckle::SpeckleParams;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DeskProfile {
    pub lambda_s: f64,
    pub lambda_r: f64,
    pub z1: f64,
    pub omega: f64,
    pub l_c: f64,
    pub grid_size: usize,
    pub pitch: f64,
    pub realizations: u64,
}

pub const DESK: DeskProfile = DeskProfile {
    lambda_s: 532e-9,
    lambda_r: 635e-9,
    z1: 0.5,
    omega: 2e-3,
    l_c: 50e-6,
    grid_size: 1024,
    pitch: 10e-6,
    realizations: 5000,
};

impl DeskProfile {
    pub fn grid(&self) -> Result<Grid> {
        Grid::new(self.grid_size, self.pitch)
    }

    /// `z2 = z1`, `z3` matched.
    pub fn geometry(&self) -> Result<GeometryParams> {
        GeometryParams::matched(self.lambda_s, self.lambda_r, self.z1, self.omega, self.l_c)
    }

    pub fn speckle(&self) -> Result<SpeckleParams> {
        SpeckleParams::new(self.omega, self.l_c, self.grid()?)
    }

    pub fn with_signal_wavelength(mut self, lambda_s: f64) -> Self {
        self.lambda_s = lambda_s;
        self
    }
}
