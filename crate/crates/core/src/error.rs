use thiserror::Error;

/// Errors produced by the optics, statistics and reconstruction routines.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum OpticsError {
    #[error("invalid field: {0}")]
    InvalidField(String),

    #[error("invalid parameters: {0}")]
    InvalidParams(String),

    #[error("grid mismatch: expected {expected}x{expected} at pitch {expected_pitch:e} m, got {found}x{found} at pitch {found_pitch:e} m")]
    ShapeMismatch {
        expected: usize,
        expected_pitch: f64,
        found: usize,
        found_pitch: f64,
    },

    /// The requested propagation would alias or discard a non-negligible part
    /// of the field's angular spectrum. Enlarge the grid or coarsen the pitch.
    #[error(
        "sampling violation at z = {distance:e} m, wavelength {wavelength:e} m: \
         {out_of_band:.3e} of the spectral power lies outside the alias-free band \
         (|f| <= {band_limit:.4e} 1/m, limit {tolerance:e}); \
         increase the grid size or the pitch"
    )]
    SamplingViolation {
        distance: f64,
        wavelength: f64,
        band_limit: f64,
        out_of_band: f64,
        tolerance: f64,
    },

    #[error("screen unresolvable: coherence length {rho:e} m is below two pixels ({pitch:e} m pitch)")]
    Unresolvable { rho: f64, pitch: f64 },

    #[error("Gaussian integral does not converge: {0}")]
    NonConvergent(String),

    #[error("degenerate PSF: {0}")]
    Degenerate(String),

    #[error("need at least {needed} samples, have {have}")]
    InsufficientSamples { needed: usize, have: usize },

    #[error("PSF fit failed (SNR {snr:.2}): {reason}")]
    FitFailure { snr: f64, reason: String },

    #[error("unknown sweep axis `{0}` (expected lambda_r, lambda_s, z3 or cn2)")]
    UnknownAxis(String),
}

pub type Result<T> = std::result::Result<T, OpticsError>;
