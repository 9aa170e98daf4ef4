use crate::error::{OpticsError, Result};

/// Pinhole stereo range `baseline * focal_length / disparity`.
pub fn range_from_disparity(baseline: f64, focal_length: f64, disparity: f64) -> Result<f64> {
    if !(disparity > 0.0) || !disparity.is_finite() {
        return Err(OpticsError::InvalidParams(format!("disparity must be positive, got {disparity}")));
    }
    if !(baseline > 0.0 && focal_length > 0.0) {
        return Err(OpticsError::InvalidParams("baseline and focal length must be positive".into()));
    }
    Ok(baseline * focal_length / disparity)
}
