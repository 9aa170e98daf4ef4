use super::accumulator::GhostAccumulator;
use crate::error::{OpticsError, Result};
use crate::field::{Grid, RealMap};

/// Reconstructed covariance image over the reference grid.
#[derive(Debug, Clone, PartialEq)]
pub struct GhostImage {
    values: RealMap,
    realizations: u64,
    config_digest: String,
}

impl GhostImage {
    pub fn new(values: RealMap, realizations: u64) -> Result<Self> {
        if let Some(v) = values.values().iter().find(|v| !v.is_finite()) {
            return Err(OpticsError::Degenerate(format!("non-finite image value {v}")));
        }
        Ok(Self {
            values,
            realizations,
            config_digest: String::new(),
        })
    }

    pub fn with_digest(mut self, digest: impl Into<String>) -> Self {
        self.config_digest = digest.into();
        self
    }

    pub fn values(&self) -> &RealMap {
        &self.values
    }

    pub fn grid(&self) -> Grid {
        self.values.grid()
    }

    pub fn pitch(&self) -> f64 {
        self.values.grid().pitch()
    }

    pub fn realizations(&self) -> u64 {
        self.realizations
    }

    pub fn config_digest(&self) -> &str {
        &self.config_digest
    }

    /// Min-max normalized copy in `[0, 1]`; all zeros for a flat image.
    pub fn normalized(&self) -> Vec<f64> {
        let v = self.values.values();
        let lo = v.iter().cloned().fold(f64::INFINITY, f64::min);
        let hi = v.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
        if hi > lo {
            v.iter().map(|x| (x - lo) / (hi - lo)).collect()
        } else {
            vec![0.0; v.len()]
        }
    }
}

/// `G = sum_bi / n - (sum_b / n)(sum_i / n)`.
pub fn finalize(acc: &GhostAccumulator) -> Result<GhostImage> {
    let n = acc.count();
    if n < 2 {
        return Err(OpticsError::InsufficientSamples {
            needed: 2,
            have: n as usize,
        });
    }
    let nf = n as f64;
    let mean_b = acc.sum_b() / nf;
    let values = acc
        .sum_bi()
        .iter()
        .zip(acc.sum_i())
        .map(|(bi, i)| bi / nf - mean_b * (i / nf))
        .collect();
    GhostImage::new(RealMap::new(acc.grid(), values)?, n)
}
