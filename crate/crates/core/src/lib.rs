//! Numerical model of non-degenerate ghost imaging: speckle illumination,
//! angular-spectrum propagation, turbulent phase screens, closed-form PSF
//! analysis and the Monte Carlo correlation pipeline.

pub mod error;
mod fft;
pub mod field;
pub mod propagation;
mod random_field;
pub mod rng;
pub mod speckle;
pub mod turbulence;
pub mod validation;
pub mod pipeline;
pub mod profile;
pub mod psf;

pub use error::{OpticsError, Result};
pub use pipeline::{ExperimentConfig, GhostAccumulator, GhostImage};
pub use field::{Aperture, ComplexField, Grid, RealMap};
pub use propagation::{propagate, AngularSpectrum};
pub use psf::{psf_report, sweep, GeometryParams, PsfReport, SweepAxis};
pub use rng::{RealizationKey, Stream};
pub use speckle::{generate_slm_field, SpeckleGenerator, SpeckleParams};
pub use turbulence::{coherence_length, PhaseScreen, PhaseScreenGenerator, TurbulenceSpec};
