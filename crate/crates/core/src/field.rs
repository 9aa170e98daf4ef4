//! Sampled complex fields, transmission masks and intensity maps.
//!
//! All maps are square `n x n`, stored row-major. Sample `(i, j)` sits at the
//! physical coordinate `((i - n/2) * pitch, (j - n/2) * pitch)`.

use num_complex::Complex64;

use crate::error::{OpticsError, Result};

/// Square sampling grid shared by fields, masks and intensity maps.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Grid {
    n: usize,
    pitch: f64,
}

impl Grid {
    pub fn new(n: usize, pitch: f64) -> Result<Self> {
        if n < 2 || !n.is_power_of_two() {
            return Err(OpticsError::InvalidParams(format!(
                "grid size must be a power of two >= 2, got {n}"
            )));
        }
        if !(pitch > 0.0 && pitch.is_finite()) {
            return Err(OpticsError::InvalidParams(format!(
                "pitch must be positive and finite, got {pitch}"
            )));
        }
        Ok(Self { n, pitch })
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn pitch(&self) -> f64 {
        self.pitch
    }

    pub fn len(&self) -> usize {
        self.n * self.n
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    /// Side length of the grid in meters.
    pub fn extent(&self) -> f64 {
        self.n as f64 * self.pitch
    }

    /// Physical coordinate of index `i` along either axis.
    #[inline]
    pub fn coord(&self, i: usize) -> f64 {
        (i as f64 - (self.n / 2) as f64) * self.pitch
    }

    /// Nearest grid index to coordinate `x`, if it falls on the grid.
    pub fn index_of(&self, x: f64) -> Option<usize> {
        let i = (x / self.pitch).round() + (self.n / 2) as f64;
        (i >= 0.0 && i < self.n as f64).then_some(i as usize)
    }

    /// Area of one pixel.
    #[inline]
    pub fn pixel_area(&self) -> f64 {
        self.pitch * self.pitch
    }

    pub(crate) fn check_same(&self, other: &Grid) -> Result<()> {
        if self.n != other.n || (self.pitch - other.pitch).abs() > 1e-12 * self.pitch {
            return Err(OpticsError::ShapeMismatch {
                expected: self.n,
                expected_pitch: self.pitch,
                found: other.n,
                found_pitch: other.pitch,
            });
        }
        Ok(())
    }
}

/// 2-D sampled scalar optical amplitude tagged with its wavelength.
#[derive(Debug, Clone, PartialEq)]
pub struct ComplexField {
    grid: Grid,
    wavelength: f64,
    samples: Vec<Complex64>,
    label: String,
}

impl ComplexField {
    pub fn new(grid: Grid, wavelength: f64, samples: Vec<Complex64>) -> Result<Self> {
        if !(wavelength > 0.0 && wavelength.is_finite()) {
            return Err(OpticsError::InvalidField(format!(
                "wavelength must be positive, got {wavelength}"
            )));
        }
        if samples.len() != grid.len() {
            return Err(OpticsError::InvalidField(format!(
                "expected {} samples, got {}",
                grid.len(),
                samples.len()
            )));
        }
        let field = Self {
            grid,
            wavelength,
            samples,
            label: String::new(),
        };
        field.validate()?;
        Ok(field)
    }

    pub fn zeros(grid: Grid, wavelength: f64) -> Result<Self> {
        Self::new(grid, wavelength, vec![Complex64::new(0.0, 0.0); grid.len()])
    }

    /// Builds a field by evaluating `f(x, y)` at every sample coordinate.
    pub fn from_fn<F>(grid: Grid, wavelength: f64, f: F) -> Result<Self>
    where
        F: Fn(f64, f64) -> Complex64,
    {
        let n = grid.n();
        let mut samples = Vec::with_capacity(grid.len());
        for i in 0..n {
            let x = grid.coord(i);
            for j in 0..n {
                samples.push(f(x, grid.coord(j)));
            }
        }
        Self::new(grid, wavelength, samples)
    }

    /// Constructor for hot loops that already guarantee finiteness.
    pub(crate) fn from_parts_unchecked(grid: Grid, wavelength: f64, samples: Vec<Complex64>) -> Self {
        debug_assert_eq!(samples.len(), grid.len());
        Self {
            grid,
            wavelength,
            samples,
            label: String::new(),
        }
    }

    pub fn with_label(mut self, label: impl Into<String>) -> Self {
        self.label = label.into();
        self
    }

    /// Returns an error if any sample is NaN or infinite.
    pub fn validate(&self) -> Result<()> {
        if let Some(k) = self
            .samples
            .iter()
            .position(|c| !(c.re.is_finite() && c.im.is_finite()))
        {
            let n = self.grid.n();
            return Err(OpticsError::InvalidField(format!(
                "non-finite sample at ({}, {})",
                k / n,
                k % n
            )));
        }
        Ok(())
    }

    pub fn grid(&self) -> Grid {
        self.grid
    }

    pub fn wavelength(&self) -> f64 {
        self.wavelength
    }

    pub fn label(&self) -> &str {
        &self.label
    }

    pub fn samples(&self) -> &[Complex64] {
        &self.samples
    }

    pub(crate) fn samples_mut(&mut self) -> &mut [Complex64] {
        &mut self.samples
    }

    pub fn into_samples(self) -> Vec<Complex64> {
        self.samples
    }

    #[inline]
    pub fn at(&self, i: usize, j: usize) -> Complex64 {
        self.samples[i * self.grid.n() + j]
    }

    /// Total power, `sum |E|^2 * pitch^2`.
    pub fn power(&self) -> f64 {
        self.samples.iter().map(|c| c.norm_sqr()).sum::<f64>() * self.grid.pixel_area()
    }

    /// Pointwise `|E|^2`.
    pub fn intensity(&self) -> RealMap {
        RealMap {
            grid: self.grid,
            values: self.samples.iter().map(|c| c.norm_sqr()).collect(),
        }
    }

    /// Pointwise product with a transmission mask.
    pub fn apply_aperture(&self, aperture: &Aperture) -> Result<ComplexField> {
        self.grid.check_same(&aperture.grid)?;
        let samples = self
            .samples
            .iter()
            .zip(&aperture.samples)
            .map(|(e, t)| e * t)
            .collect();
        Ok(Self {
            grid: self.grid,
            wavelength: self.wavelength,
            samples,
            label: self.label.clone(),
        })
    }

    /// `a * self + b * other`, for fields on the same grid and wavelength.
    pub fn linear_combination(&self, a: Complex64, other: &ComplexField, b: Complex64) -> Result<ComplexField> {
        self.grid.check_same(&other.grid)?;
        let samples = self
            .samples
            .iter()
            .zip(&other.samples)
            .map(|(x, y)| a * x + b * y)
            .collect();
        ComplexField::new(self.grid, self.wavelength, samples)
    }

    /// Relative RMS difference `||self - other|| / ||other||`.
    pub fn relative_rms_diff(&self, other: &ComplexField) -> f64 {
        let num: f64 = self
            .samples
            .iter()
            .zip(&other.samples)
            .map(|(a, b)| (a - b).norm_sqr())
            .sum();
        let den: f64 = other.samples.iter().map(|c| c.norm_sqr()).sum();
        if den == 0.0 {
            num.sqrt()
        } else {
            (num / den).sqrt()
        }
    }
}

/// Complex transmission mask `T(y)`, with `|T| <= 1` everywhere.
#[derive(Debug, Clone, PartialEq)]
pub struct Aperture {
    grid: Grid,
    samples: Vec<Complex64>,
}

const MAX_TRANSMISSION: f64 = 1.0 + 1e-12;

impl Aperture {
    pub fn new(grid: Grid, samples: Vec<Complex64>) -> Result<Self> {
        if samples.len() != grid.len() {
            return Err(OpticsError::InvalidParams(format!(
                "aperture expects {} samples, got {}",
                grid.len(),
                samples.len()
            )));
        }
        if let Some(t) = samples
            .iter()
            .find(|t| !(t.re.is_finite() && t.im.is_finite()) || t.norm() > MAX_TRANSMISSION)
        {
            return Err(OpticsError::InvalidParams(format!(
                "aperture transmission {t} is not finite or exceeds unit magnitude"
            )));
        }
        Ok(Self { grid, samples })
    }

    pub fn from_fn<F>(grid: Grid, f: F) -> Result<Self>
    where
        F: Fn(f64, f64) -> Complex64,
    {
        let n = grid.n();
        let mut samples = Vec::with_capacity(grid.len());
        for i in 0..n {
            let x = grid.coord(i);
            for j in 0..n {
                samples.push(f(x, grid.coord(j)));
            }
        }
        Self::new(grid, samples)
    }

    /// Real 0/1 mask from a predicate on coordinates.
    pub fn from_mask<F>(grid: Grid, inside: F) -> Result<Self>
    where
        F: Fn(f64, f64) -> bool,
    {
        Self::from_fn(grid, |x, y| {
            if inside(x, y) {
                Complex64::new(1.0, 0.0)
            } else {
                Complex64::new(0.0, 0.0)
            }
        })
    }

    pub fn ones(grid: Grid) -> Self {
        Self {
            grid,
            samples: vec![Complex64::new(1.0, 0.0); grid.len()],
        }
    }

    pub fn zeros(grid: Grid) -> Self {
        Self {
            grid,
            samples: vec![Complex64::new(0.0, 0.0); grid.len()],
        }
    }

    /// Single open pixel nearest to `(x, y)`.
    pub fn pinhole(grid: Grid, x: f64, y: f64) -> Result<Self> {
        let (i, j) = match (grid.index_of(x), grid.index_of(y)) {
            (Some(i), Some(j)) => (i, j),
            _ => {
                return Err(OpticsError::InvalidParams(format!(
                    "pinhole at ({x}, {y}) is off the grid"
                )))
            }
        };
        let mut ap = Self::zeros(grid);
        ap.samples[i * grid.n() + j] = Complex64::new(1.0, 0.0);
        Ok(ap)
    }

    pub fn disk(grid: Grid, radius: f64) -> Result<Self> {
        Self::from_mask(grid, |x, y| x * x + y * y <= radius * radius)
    }

    /// Two slits parallel to the second axis, centered at `±separation/2`.
    pub fn double_slit(grid: Grid, width: f64, separation: f64, length: f64) -> Result<Self> {
        let half_w = 0.5 * width;
        let half_s = 0.5 * separation;
        let half_l = 0.5 * length;
        Self::from_mask(grid, |x, y| {
            y.abs() <= half_l && ((x - half_s).abs() < half_w || (x + half_s).abs() < half_w)
        })
    }

    pub fn grid(&self) -> Grid {
        self.grid
    }

    pub fn samples(&self) -> &[Complex64] {
        &self.samples
    }

    /// `|T|^2`, the intensity transmission the bucket detector sees.
    pub fn intensity_transmission(&self) -> RealMap {
        RealMap {
            grid: self.grid,
            values: self.samples.iter().map(|t| t.norm_sqr()).collect(),
        }
    }
}

/// Real-valued `n x n` map: intensities, ghost images, masks.
#[derive(Debug, Clone, PartialEq)]
pub struct RealMap {
    grid: Grid,
    values: Vec<f64>,
}

impl RealMap {
    pub fn new(grid: Grid, values: Vec<f64>) -> Result<Self> {
        if values.len() != grid.len() {
            return Err(OpticsError::InvalidParams(format!(
                "map expects {} values, got {}",
                grid.len(),
                values.len()
            )));
        }
        Ok(Self { grid, values })
    }

    pub fn from_fn<F>(grid: Grid, f: F) -> Self
    where
        F: Fn(f64, f64) -> f64,
    {
        let n = grid.n();
        let mut values = Vec::with_capacity(grid.len());
        for i in 0..n {
            let x = grid.coord(i);
            for j in 0..n {
                values.push(f(x, grid.coord(j)));
            }
        }
        Self { grid, values }
    }

    pub fn grid(&self) -> Grid {
        self.grid
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn into_values(self) -> Vec<f64> {
        self.values
    }

    #[inline]
    pub fn at(&self, i: usize, j: usize) -> f64 {
        self.values[i * self.grid.n() + j]
    }

    pub fn sum(&self) -> f64 {
        self.values.iter().sum()
    }
}
