//! Gait period estimation from the bounding-box width signal and cycle partitioning.
//!
//! The box is widest when the legs are farthest apart, so the width signal repeats once per
//! step. One detected width period is treated as one cycle containing two steps; see
//! [`crate::features::temporal_features`] for how cadence uses that convention.

use crate::error::{Error, Result};
use crate::scalar::Scalar;
use crate::segmentation::SilhouetteMask;

/// Shortest accepted period, in frames.
pub const MIN_PERIOD: usize = 4;
/// Minimum normalized autocorrelation for a peak to count as the period.
pub const PEAK_THRESHOLD: f64 = 0.3;
/// Minimum signal length accepted by [`estimate_period`]: three minimum periods.
pub const MIN_SIGNAL_LEN: usize = 3 * MIN_PERIOD;

/// Per-frame bounding-box width (0 for frames without a silhouette).
#[derive(Debug, Clone, PartialEq)]
pub struct WidthSignal<T> {
    pub values: Vec<T>,
    pub fps: T,
}

impl<T: Scalar> WidthSignal<T> {
    pub fn new(values: Vec<T>, fps: T) -> Self {
        Self { values, fps }
    }

    pub fn from_masks(masks: &[SilhouetteMask], fps: T) -> Self {
        let values = masks
            .iter()
            .map(|m| m.bbox().map_or(T::zero(), |b| T::from_usize_lossy(b.width())))
            .collect();
        Self { values, fps }
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }
}

/// Inclusive frame range covering one gait period.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct GaitCycle {
    pub start_frame: usize,
    pub end_frame: usize,
    pub period_frames: usize,
}

impl GaitCycle {
    pub fn new(start_frame: usize, period_frames: usize) -> Result<Self> {
        if period_frames < MIN_PERIOD {
            return Err(Error::InvalidParameter(format!(
                "gait period must be at least {MIN_PERIOD} frames, got {period_frames}"
            )));
        }
        Ok(Self { start_frame, end_frame: start_frame + period_frames - 1, period_frames })
    }

    pub fn frames(&self) -> std::ops::RangeInclusive<usize> {
        self.start_frame..=self.end_frame
    }
}

/// Normalized autocorrelation of the mean-subtracted signal at every lag in `0..=max_lag`.
///
/// Each lag is normalized by the energies of the two overlapping segments, so an exactly
/// periodic signal scores 1 at its period regardless of how much data overlaps.
pub fn autocorrelation<T: Scalar>(values: &[T], max_lag: usize) -> Vec<T> {
    let n = values.len();
    let mean = crate::scalar::mean(values).unwrap_or_else(T::zero);
    let centered: Vec<T> = values.iter().map(|&v| v - mean).collect();
    (0..=max_lag.min(n.saturating_sub(1)))
        .map(|lag| {
            let a = &centered[..n - lag];
            let b = &centered[lag..];
            let cross: T = a.iter().zip(b).map(|(&x, &y)| x * y).sum();
            let ea: T = a.iter().map(|&x| x * x).sum();
            let eb: T = b.iter().map(|&x| x * x).sum();
            let denom = (ea * eb).sqrt();
            if denom > T::zero() {
                cross / denom
            } else {
                T::zero()
            }
        })
        .collect()
}

/// Lag of the first local maximum in `[MIN_PERIOD, len / 2]` whose normalized autocorrelation
/// reaches [`PEAK_THRESHOLD`].
pub fn estimate_period<T: Scalar>(signal: &WidthSignal<T>) -> Result<usize> {
    let n = signal.len();
    if n < MIN_SIGNAL_LEN {
        return Err(Error::SequenceTooShort { needed: MIN_SIGNAL_LEN, got: n });
    }
    if signal.values.iter().any(|v| !v.is_finite()) {
        return Err(Error::NonFinite);
    }
    let max_lag = n / 2;
    let first = signal.values[0];
    if signal.values.iter().all(|&v| v == first) {
        return Err(Error::NoPeriodicity);
    }
    // one lag past the search range so the last candidate can be tested as a peak
    let ac = autocorrelation(&signal.values, max_lag + 1);
    let threshold = T::lit(PEAK_THRESHOLD);
    (MIN_PERIOD..=max_lag)
        .find(|&lag| {
            let right_ok = ac.get(lag + 1).is_none_or(|&r| ac[lag] >= r);
            ac[lag] > ac[lag - 1] && right_ok && ac[lag] >= threshold
        })
        .ok_or(Error::NoPeriodicity)
}

/// Three-frame moving average; the two end frames average their available neighbours.
pub fn smooth3<T: Scalar>(values: &[T]) -> Vec<T> {
    let n = values.len();
    (0..n)
        .map(|i| {
            let lo = i.saturating_sub(1);
            let hi = (i + 1).min(n - 1);
            let window = &values[lo..=hi];
            window.iter().copied().sum::<T>() / T::from_usize_lossy(window.len())
        })
        .collect()
}

/// First local maximum: a frame higher than its predecessor whose value holds (possibly over a
/// plateau) until the signal drops or ends. Frame 0 has no predecessor and qualifies on the
/// right-hand test alone.
pub fn first_local_max<T: Scalar>(values: &[T]) -> Option<usize> {
    let n = values.len();
    (0..n).find(|&t| {
        if t > 0 && values[t] <= values[t - 1] {
            return false;
        }
        let mut j = t + 1;
        while j < n && values[j] == values[t] {
            j += 1;
        }
        j == n || values[j] < values[t]
    })
}

/// Tiles cycles of length `period` forward from the first maximum of the smoothed width signal,
/// dropping the trailing partial cycle.
pub fn partition_cycles<T: Scalar>(signal: &WidthSignal<T>, period: usize) -> Result<Vec<GaitCycle>> {
    if period < MIN_PERIOD {
        return Err(Error::InvalidParameter(format!("gait period must be at least {MIN_PERIOD} frames, got {period}")));
    }
    let n = signal.len();
    if n < period {
        return Err(Error::SequenceTooShort { needed: period, got: n });
    }
    let smoothed = smooth3(&signal.values);
    let mut start = first_local_max(&smoothed).unwrap_or(0);
    let mut cycles = Vec::new();
    while start + period <= n {
        cycles.push(GaitCycle::new(start, period)?);
        start += period;
    }
    Ok(cycles)
}

/// Number of cycles features are extracted from.
pub const FEATURE_WINDOW_CYCLES: usize = 2;

/// The first two complete cycles.
pub fn select_feature_window(cycles: &[GaitCycle]) -> Result<Vec<GaitCycle>> {
    if cycles.len() < FEATURE_WINDOW_CYCLES {
        return Err(Error::InsufficientCycles { needed: FEATURE_WINDOW_CYCLES, got: cycles.len() });
    }
    Ok(cycles[..FEATURE_WINDOW_CYCLES].to_vec())
}
