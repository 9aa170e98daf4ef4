//! Closed-form resolution of the correlation image.
//!
//! The PSF width is `Re sqrt(1 / (2 (K1^2 + K2^2 + K3^2 + K4^2)))`, where the
//! `K` coefficients are built from the complex Gaussian-integral coefficients
//! `A, B, C, D` (vacuum) or their turbulent counterparts. Field of view and
//! magnification are not given in closed form; they are extracted from the
//! quadratic form of the full four-fold Gaussian correlation integral (see
//! [`gaussian_response`]), which also yields an independent PSF width.

use std::f64::consts::PI;

use nalgebra::{Matrix4, Vector4};
use num_complex::Complex64;

use crate::error::{OpticsError, Result};
use crate::turbulence::{coherence_length, TurbulenceSpec};

/// Reference propagation distance satisfying `lambda_s z1 = lambda_r z3`.
pub fn matched_reference_distance(lambda_s: f64, z1: f64, lambda_r: f64) -> f64 {
    lambda_s * z1 / lambda_r
}

/// Wavelengths, distances and source statistics of one imaging geometry.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GeometryParams {
    pub lambda_s: f64,
    pub lambda_r: f64,
    pub z1: f64,
    pub z2: f64,
    pub z3: f64,
    pub omega: f64,
    pub l_c: f64,
}

impl GeometryParams {
    pub fn new(lambda_s: f64, lambda_r: f64, z1: f64, z2: f64, z3: f64, omega: f64, l_c: f64) -> Result<Self> {
        let g = Self {
            lambda_s,
            lambda_r,
            z1,
            z2,
            z3,
            omega,
            l_c,
        };
        g.validate()?;
        Ok(g)
    }

    /// `z2 = z1` and `z3` at the matched distance.
    pub fn matched(lambda_s: f64, lambda_r: f64, z1: f64, omega: f64, l_c: f64) -> Result<Self> {
        Self::new(
            lambda_s,
            lambda_r,
            z1,
            z1,
            matched_reference_distance(lambda_s, z1, lambda_r),
            omega,
            l_c,
        )
    }

    pub fn validate(&self) -> Result<()> {
        let all = [
            ("lambda_s", self.lambda_s),
            ("lambda_r", self.lambda_r),
            ("z1", self.z1),
            ("z2", self.z2),
            ("z3", self.z3),
            ("omega", self.omega),
            ("l_c", self.l_c),
        ];
        for (name, v) in all {
            if !(v > 0.0 && v.is_finite()) {
                return Err(OpticsError::InvalidParams(format!("{name} must be positive, got {v}")));
            }
        }
        Ok(())
    }

    pub fn is_matched(&self) -> bool {
        (self.lambda_s * self.z1 - self.lambda_r * self.z3).abs() <= 1e-12 * self.lambda_s * self.z1
    }

    /// Replaces `z3` by the matched distance.
    pub fn rematched(mut self) -> Self {
        self.z3 = matched_reference_distance(self.lambda_s, self.z1, self.lambda_r);
        self
    }

    fn base(&self) -> f64 {
        1.0 / (4.0 * self.omega * self.omega) + 1.0 / (2.0 * self.l_c * self.l_c)
    }

    fn signal_chirp(&self) -> f64 {
        PI / (self.lambda_s * self.z1)
    }

    fn reference_chirp(&self) -> f64 {
        PI / (self.lambda_r * self.z3)
    }
}

/// Gaussian-integral coefficients and the derived `K1..K4`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PsfCoefficients {
    pub a: Complex64,
    pub b: Complex64,
    pub c: Complex64,
    pub d: Complex64,
    pub k1: Complex64,
    pub k2: Complex64,
    pub k3: Complex64,
    pub k4: Complex64,
}

impl PsfCoefficients {
    fn check_convergent(self) -> Result<Self> {
        for (name, v) in [("A", self.a), ("B", self.b), ("C", self.c), ("D", self.d)] {
            if !(v.re > 0.0) || !v.im.is_finite() {
                return Err(OpticsError::NonConvergent(format!("Re({name}) = {} <= 0", v.re)));
            }
        }
        Ok(self)
    }

    pub fn k_squared_sum(&self) -> Complex64 {
        self.k1 * self.k1 + self.k2 * self.k2 + self.k3 * self.k3 + self.k4 * self.k4
    }
}

/// Vacuum coefficients.
pub fn vacuum_coefficients(g: &GeometryParams) -> Result<PsfCoefficients> {
    g.validate()?;
    let base = Complex64::new(g.base(), 0.0);
    let i_as = Complex64::new(0.0, g.signal_chirp());
    let i_ar = Complex64::new(0.0, g.reference_chirp());
    let lc2 = g.l_c * g.l_c;
    let lc4 = lc2 * lc2;
    let ls_z1 = g.lambda_s * g.z1;

    let a = base - i_as;
    let b = base + i_as;
    let c = base - i_ar - 1.0 / (4.0 * b * lc4);
    let d = base + i_ar - 1.0 / (4.0 * a * lc4);

    let k1 = PI / (a.sqrt() * ls_z1);
    let k2 = PI / (b.sqrt() * ls_z1);
    let k3 = PI / (2.0 * b * c.sqrt() * ls_z1 * lc2);
    let k4 = PI / (2.0 * d.sqrt() * ls_z1) * (1.0 / (b * lc2) - 1.0 / (a * lc2));

    PsfCoefficients { a, b, c, d, k1, k2, k3, k4 }.check_convergent()
}

/// Turbulent coefficients for coherence length `rho` (`f64::INFINITY` is vacuum).
///
/// Evaluated sequentially: `A'`, then `B'` from `A'`, `C'` from `B'`, and `D'`
/// from all three. Two terms are adjusted so the result reduces to the vacuum
/// coefficients as `rho -> inf`:
///
/// * in `D'` the term `1/(4 A' l_c^2)` is dimensionally inconsistent with the
///   rest of the sum; it is taken as `1/(4 A' l_c^4)`, its vacuum counterpart.
/// * in `K4'` the bracketed turbulence factor
///   `(1/(2 A' rho^2) + 1/(8 A' B' C' l_c^4 rho^2))` vanishes in vacuum and
///   would drop the `1/(B l_c^2)` term; a leading `1 +` is restored.
pub fn turbulent_coefficients(g: &GeometryParams, rho: f64) -> Result<PsfCoefficients> {
    g.validate()?;
    if !(rho > 0.0) || rho.is_nan() {
        return Err(OpticsError::InvalidParams(format!(
            "coherence length must be positive or infinite, got {rho}"
        )));
    }
    // zero in vacuum, so every turbulence term drops out exactly
    let inv_rho2 = if rho.is_infinite() { 0.0 } else { 1.0 / (rho * rho) };
    let inv_rho4 = inv_rho2 * inv_rho2;

    let base = Complex64::new(g.base(), 0.0);
    let i_as = Complex64::new(0.0, g.signal_chirp());
    let i_ar = Complex64::new(0.0, g.reference_chirp());
    let lc2 = g.l_c * g.l_c;
    let lc4 = lc2 * lc2;
    let lc8 = lc4 * lc4;
    let ls_z1 = g.lambda_s * g.z1;
    let half_inv_rho2 = 0.5 * inv_rho2;

    let a = base + half_inv_rho2 - i_as;
    let b = base + half_inv_rho2 + i_as - inv_rho4 / (4.0 * a);
    let c = base + half_inv_rho2 - i_ar - 1.0 / (4.0 * b * lc4);
    let d = base + i_ar
        - 1.0 / (4.0 * a * lc4)
        - inv_rho4 / (16.0 * a * a * b * lc4)
        - inv_rho4 / (64.0 * a * a * b * b * c * lc8);

    let screen = 1.0 - half_inv_rho2 / a;
    let k1 = PI / (a.sqrt() * ls_z1);
    let k2 = PI / (b.sqrt() * ls_z1) * screen;
    let k3 = PI / (2.0 * b * c.sqrt() * ls_z1 * lc2) * screen;
    let correction = 1.0 + half_inv_rho2 / a + inv_rho2 / (8.0 * a * b * c * lc4);
    let k4 = PI / (2.0 * d.sqrt() * ls_z1) * (-1.0 / (a * lc2) + 1.0 / (b * lc2) * screen * correction);

    PsfCoefficients { a, b, c, d, k1, k2, k3, k4 }.check_convergent()
}

/// `Re sqrt(1 / (2 sum K_i^2))`, principal branch.
pub fn psf_width(coeffs: &PsfCoefficients) -> Result<f64> {
    let sum = coeffs.k_squared_sum();
    if sum == Complex64::new(0.0, 0.0) {
        return Err(OpticsError::Degenerate("sum of K_i^2 is zero".into()));
    }
    let w = (1.0 / (2.0 * sum)).sqrt().re;
    if !(w > 0.0 && w.is_finite()) {
        return Err(OpticsError::Degenerate(format!("width evaluates to {w}")));
    }
    Ok(w)
}

/// Quadratic form of the log correlation image of a point object,
/// `ln G(x, y) = -s x^2 + 2 r x y - p y^2`, with `x` the reference-plane
/// coordinate and `y` the object coordinate.
///
/// Obtained by evaluating the four-fold Gaussian integral over the two
/// modulator coordinates of each arm and their conjugates exactly, with
/// turbulence entering as a Gaussian mutual coherence `exp(-d^2/(2 rho^2))`
/// between the signal-arm modulator coordinates.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GaussianResponse {
    pub p: f64,
    pub r: f64,
    pub s: f64,
}

impl GaussianResponse {
    /// 1/e half-width in the object coordinate at fixed `x`.
    pub fn object_width(&self) -> f64 {
        1.0 / self.p.sqrt()
    }

    /// 1/e half-width of a point object's image in the reference plane.
    pub fn point_image_width(&self) -> f64 {
        1.0 / self.s.sqrt()
    }

    /// `m` in `exp(-(y - m x)^2 / ...)`.
    pub fn magnification(&self) -> f64 {
        self.r / self.p
    }

    /// Standard deviation of the `exp(-x^2 / (2 W_fov^2))` factor.
    pub fn field_of_view(&self) -> f64 {
        1.0 / (2.0 * (self.s - self.r * self.r / self.p)).sqrt()
    }
}

pub fn gaussian_response(g: &GeometryParams, rho: f64) -> Result<GaussianResponse> {
    g.validate()?;
    let a = g.signal_chirp();
    let b = g.reference_chirp();
    let base = g.base();
    let t = if rho.is_infinite() { 0.0 } else { 0.5 / (rho * rho) };
    let cpl = -0.5 / (g.l_c * g.l_c);
    let c = |re: f64, im: f64| Complex64::new(re, im);
    let z = c(0.0, 0.0);

    // variables: (u1, u2, u1', u2'); exponent -v^T K v + L^T v
    let k = Matrix4::new(
        c(base + t, -a), c(cpl, 0.0), c(-t, 0.0), z,
        c(cpl, 0.0), c(base, b), z, z,
        c(-t, 0.0), z, c(base + t, a), c(cpl, 0.0),
        z, z, c(cpl, 0.0), c(base, -b),
    );
    let k_inv = k
        .try_inverse()
        .ok_or_else(|| OpticsError::NonConvergent("singular Gaussian form".into()))?;
    let lx = Vector4::new(z, c(0.0, 2.0 * b), z, c(0.0, -2.0 * b));
    let ly = Vector4::new(c(0.0, -2.0 * a), z, c(0.0, 2.0 * a), z);
    let form = |u: &Vector4<Complex64>, v: &Vector4<Complex64>| (u.transpose() * k_inv * v)[(0, 0)].re / 4.0;

    let resp = GaussianResponse {
        p: -form(&ly, &ly),
        r: form(&lx, &ly),
        s: -form(&lx, &lx),
    };
    if !(resp.p > 0.0 && resp.s > 0.0 && resp.s - resp.r * resp.r / resp.p > 0.0) {
        return Err(OpticsError::NonConvergent(format!("response form is not negative definite: {resp:?}")));
    }
    Ok(resp)
}

/// Width, field of view and magnification of one configuration.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PsfReport {
    pub w_psf: f64,
    pub w_fov: f64,
    pub magnification: f64,
    pub coefficients: PsfCoefficients,
    pub turbulent: bool,
    /// Coherence length used; infinite in vacuum.
    pub rho: f64,
}

/// Vacuum branch when `turb` is `None` or has `cn2 = 0`. The coherence
/// length is evaluated at the signal wavelength over `z1`.
pub fn psf_report(g: &GeometryParams, turb: Option<&TurbulenceSpec>) -> Result<PsfReport> {
    let rho = match turb {
        Some(t) if !t.is_vacuum() => coherence_length(&t.with_wavelength(g.lambda_s)?.with_path_length(g.z1)?),
        _ => f64::INFINITY,
    };
    let turbulent = rho.is_finite();
    let coefficients = if turbulent {
        turbulent_coefficients(g, rho)?
    } else {
        vacuum_coefficients(g)?
    };
    let w_psf = psf_width(&coefficients)?;
    let response = gaussian_response(g, rho)?;
    Ok(PsfReport {
        w_psf,
        w_fov: response.field_of_view(),
        magnification: response.magnification(),
        coefficients,
        turbulent,
        rho,
    })
}

/// Parameter varied by [`sweep`].
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SweepAxis {
    LambdaR,
    LambdaS,
    Z3,
    Cn2,
}

impl SweepAxis {
    pub fn name(self) -> &'static str {
        match self {
            SweepAxis::LambdaR => "lambda_r",
            SweepAxis::LambdaS => "lambda_s",
            SweepAxis::Z3 => "z3",
            SweepAxis::Cn2 => "cn2",
        }
    }
}

impl std::str::FromStr for SweepAxis {
    type Err = OpticsError;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "lambda_r" => Ok(SweepAxis::LambdaR),
            "lambda_s" => Ok(SweepAxis::LambdaS),
            "z3" => Ok(SweepAxis::Z3),
            "cn2" => Ok(SweepAxis::Cn2),
            other => Err(OpticsError::UnknownAxis(other.to_string())),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SweepRow {
    pub value: f64,
    pub report: PsfReport,
}

/// One report per value of `axis`.
///
/// Wavelength sweeps re-match `z3` unless `rematch` is false. A `cn2` sweep
/// uses `turb` only for its path length; without it the path is `z1`.
pub fn sweep(
    template: &GeometryParams,
    axis: SweepAxis,
    values: &[f64],
    turb: Option<&TurbulenceSpec>,
    rematch: bool,
) -> Result<Vec<SweepRow>> {
    if values.is_empty() {
        return Err(OpticsError::InvalidParams("sweep needs at least one value".into()));
    }
    values
        .iter()
        .map(|&value| {
            let mut g = *template;
            let mut t = turb.copied();
            match axis {
                SweepAxis::LambdaR => g.lambda_r = value,
                SweepAxis::LambdaS => g.lambda_s = value,
                SweepAxis::Z3 => g.z3 = value,
                SweepAxis::Cn2 => {
                    let path = turb.map_or(g.z1, |t| t.path_length());
                    t = Some(TurbulenceSpec::new(value, path, g.lambda_s)?);
                }
            }
            if rematch && matches!(axis, SweepAxis::LambdaR | SweepAxis::LambdaS) {
                g = g.rematched();
            }
            g.validate()?;
            Ok(SweepRow {
                value,
                report: psf_report(&g, t.as_ref())?,
            })
        })
        .collect()
}
