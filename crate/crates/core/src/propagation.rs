//! Angular-spectrum propagation between parallel planes.
//!
//! The transfer function is `exp(i 2 pi z (sqrt(1/lambda^2 - f^2) - 1/lambda))`,
//! i.e. exact scalar diffraction with the constant carrier phase `exp(ikz)`
//! removed. It has unit modulus on every propagating frequency, so a call that
//! passes the sampling check conserves power to rounding.
//!
//! Instead of zeroing the part of the spectrum beyond the alias-free band
//! (which would silently discard power), the propagator measures how much of
//! the input's spectral power lies there and refuses to run when it exceeds
//! the configured tolerance.

use num_complex::Complex64;

use crate::error::{OpticsError, Result};
use crate::fft::{fft2, signed_bin};
use crate::field::{ComplexField, Grid};

/// Largest fraction of spectral power allowed outside the alias-free band.
pub const DEFAULT_ALIAS_TOLERANCE: f64 = 1e-4;

/// Largest fraction of spectral power allowed on evanescent frequencies,
/// which are dropped and would otherwise break power conservation.
pub const EVANESCENT_TOLERANCE: f64 = 1e-12;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
#[repr(u8)]
enum Band {
    Pass,
    Aliased,
    Evanescent,
}

/// Precomputed propagation operator for one grid, wavelength and distance.
#[derive(Debug, Clone)]
pub struct AngularSpectrum {
    grid: Grid,
    wavelength: f64,
    distance: f64,
    band_limit: f64,
    alias_tolerance: f64,
    has_stops: bool,
    // Both stored in the transposed spectral layout of `Fft2`.
    transfer: Vec<Complex64>,
    band: Vec<Band>,
}

/// Alias-free half-bandwidth of the sampled transfer function,
/// `1 / (lambda * sqrt((2 z df)^2 + 1))` with `df = 1 / (n * pitch)`.
pub fn band_limit(grid: Grid, wavelength: f64, distance: f64) -> f64 {
    let df = 1.0 / grid.extent();
    1.0 / (wavelength * ((2.0 * distance * df).powi(2) + 1.0).sqrt())
}

impl AngularSpectrum {
    pub fn new(grid: Grid, wavelength: f64, distance: f64) -> Result<Self> {
        if !(wavelength > 0.0 && wavelength.is_finite()) {
            return Err(OpticsError::InvalidParams(format!(
                "wavelength must be positive, got {wavelength}"
            )));
        }
        if !(distance >= 0.0 && distance.is_finite()) {
            return Err(OpticsError::InvalidParams(format!(
                "propagation distance must be >= 0, got {distance}"
            )));
        }
        let n = grid.n();
        let df = 1.0 / grid.extent();
        let inv_lambda = 1.0 / wavelength;
        let inv_lambda2 = inv_lambda * inv_lambda;
        let limit = band_limit(grid, wavelength, distance);
        let two_pi_z = 2.0 * std::f64::consts::PI * distance;

        let freqs: Vec<f64> = (0..n).map(|k| signed_bin(k, n) as f64 * df).collect();
        let mut transfer = Vec::with_capacity(grid.len());
        let mut band = Vec::with_capacity(grid.len());
        let mut has_stops = false;
        // transposed layout: outer index is ky
        for &fy in &freqs {
            for &fx in &freqs {
                let f2 = fx * fx + fy * fy;
                if f2 >= inv_lambda2 {
                    transfer.push(Complex64::new(0.0, 0.0));
                    band.push(Band::Evanescent);
                    has_stops = true;
                    continue;
                }
                // sqrt(1/l^2 - f^2) - 1/l, written to avoid cancellation
                let kz_minus_k = -f2 / (inv_lambda + (inv_lambda2 - f2).sqrt());
                transfer.push(Complex64::from_polar(1.0, two_pi_z * kz_minus_k));
                if fx.abs() <= limit && fy.abs() <= limit {
                    band.push(Band::Pass);
                } else {
                    band.push(Band::Aliased);
                    has_stops = true;
                }
            }
        }
        Ok(Self {
            grid,
            wavelength,
            distance,
            band_limit: limit,
            alias_tolerance: DEFAULT_ALIAS_TOLERANCE,
            has_stops,
            transfer,
            band,
        })
    }

    /// Overrides [`DEFAULT_ALIAS_TOLERANCE`].
    pub fn with_alias_tolerance(mut self, tolerance: f64) -> Self {
        self.alias_tolerance = tolerance;
        self
    }

    pub fn grid(&self) -> Grid {
        self.grid
    }

    pub fn wavelength(&self) -> f64 {
        self.wavelength
    }

    pub fn distance(&self) -> f64 {
        self.distance
    }

    pub fn band_limit(&self) -> f64 {
        self.band_limit
    }

    /// True when every grid frequency lies inside the alias-free band, so
    /// any input is accepted.
    pub fn is_unconditionally_valid(&self) -> bool {
        !self.has_stops
    }

    /// Propagates `field` by this operator's distance.
    pub fn apply(&self, field: &ComplexField) -> Result<ComplexField> {
        if (field.wavelength() - self.wavelength).abs() > 1e-12 * self.wavelength {
            return Err(OpticsError::InvalidField(format!(
                "field wavelength {:e} m does not match propagator wavelength {:e} m",
                field.wavelength(),
                self.wavelength
            )));
        }
        self.grid.check_same(&field.grid())?;
        field.validate()?;
        let mut data = field.samples().to_vec();
        forward_spectrum(&mut data, self.grid.n());
        self.finish_from_spectrum(&mut data)?;
        Ok(ComplexField::from_parts_unchecked(self.grid, self.wavelength, data).with_label(field.label()))
    }

    /// Checks sampling, applies the transfer function and inverse transforms.
    /// `data` must hold a spectrum produced by [`forward_spectrum`].
    pub(crate) fn finish_from_spectrum(&self, data: &mut [Complex64]) -> Result<()> {
        if self.has_stops {
            self.check_sampling(data)?;
        }
        for (s, h) in data.iter_mut().zip(&self.transfer) {
            *s *= h;
        }
        fft2(self.grid.n()).inverse_from_transposed(data);
        Ok(())
    }

    fn check_sampling(&self, spectrum: &[Complex64]) -> Result<()> {
        let mut total = 0.0;
        let mut aliased = 0.0;
        let mut evanescent = 0.0;
        for (s, b) in spectrum.iter().zip(&self.band) {
            let p = s.norm_sqr();
            total += p;
            match b {
                Band::Pass => {}
                Band::Aliased => aliased += p,
                Band::Evanescent => evanescent += p,
            }
        }
        if total == 0.0 {
            return Ok(());
        }
        if evanescent / total > EVANESCENT_TOLERANCE {
            return Err(OpticsError::SamplingViolation {
                distance: self.distance,
                wavelength: self.wavelength,
                band_limit: 1.0 / self.wavelength,
                out_of_band: evanescent / total,
                tolerance: EVANESCENT_TOLERANCE,
            });
        }
        if aliased / total > self.alias_tolerance {
            return Err(OpticsError::SamplingViolation {
                distance: self.distance,
                wavelength: self.wavelength,
                band_limit: self.band_limit,
                out_of_band: aliased / total,
                tolerance: self.alias_tolerance,
            });
        }
        Ok(())
    }
}

/// Forward transform into the layout expected by
/// [`AngularSpectrum::finish_from_spectrum`].
pub(crate) fn forward_spectrum(data: &mut [Complex64], n: usize) {
    fft2(n).forward_transposed(data);
}

/// Propagates `field` over `distance` meters.
pub fn propagate(field: &ComplexField, distance: f64) -> Result<ComplexField> {
    AngularSpectrum::new(field.grid(), field.wavelength(), distance)?.apply(field)
}
