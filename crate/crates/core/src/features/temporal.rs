use crate::error::{Error, Result};
use crate::scalar::Scalar;

/// Steps per detected width-signal period.
pub const STEPS_PER_CYCLE: f64 = 2.0;

/// `[stride length (px), step length (px), cadence (steps/min), velocity (px/min)]`.
///
/// `centroids` holds the silhouette centroid x per frame of the feature window (`None` where
/// the frame has no silhouette). Stride length is the mean of `|x(t + period) - x(t)|` over every
/// frame pair one period apart; step length is half of it. Cadence counts two steps per period,
/// and velocity is `stride * 0.5 * cadence`.
pub fn temporal_features<T: Scalar>(centroids: &[Option<T>], period: usize, fps: T) -> Result<[T; 4]> {
    if !(fps.is_finite() && fps > T::zero()) {
        return Err(Error::InvalidParameter(format!("fps must be positive, got {fps}")));
    }
    if period == 0 || centroids.len() < period + 1 {
        return Err(Error::EmptyWindow);
    }
    let displacements: Vec<T> = centroids
        .iter()
        .zip(&centroids[period..])
        .filter_map(|(&a, &b)| Some((b? - a?).abs()))
        .collect();
    let stride = crate::scalar::mean(&displacements).ok_or(Error::EmptyWindow)?;
    Ok(temporal_from_stride(stride, period, fps))
}

/// Temporal features from a known stride length.
pub fn temporal_from_stride<T: Scalar>(stride: T, period: usize, fps: T) -> [T; 4] {
    let half = T::lit(0.5);
    let cadence = T::lit(STEPS_PER_CYCLE) * fps * T::lit(60.0) / T::from_usize_lossy(period);
    [stride, stride * half, cadence, stride * half * cadence]
}
