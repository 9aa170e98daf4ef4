//! Monte Carlo ghost imaging: per-realization simulation of both arms,
//! streaming covariance accumulation and image analysis.

mod accumulator;
mod config;
mod fit;
mod image;
mod ranging;
mod run;
mod simulate;

pub use accumulator::GhostAccumulator;
pub use config::ExperimentConfig;
pub use fit::{estimate_psf_width, fit_psf_width, PsfFit};
pub use image::{finalize, GhostImage};
pub use ranging::range_from_disparity;
pub use run::{run, run_with_plan, PartitionPlan, DEFAULT_CHUNKS};
pub use simulate::{simulate_realization, Realization, Simulator};
