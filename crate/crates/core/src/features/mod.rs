//! Spatial, temporal and wavelet-energy gait features and their fusion into one 14-dimensional
//! descriptor.

mod haar;
mod spatial;
mod temporal;
mod wavelet;

pub use haar::{haar_dwt2, haar_idwt2, Grid, Subbands};
pub use spatial::spatial_features;
pub use temporal::{temporal_features, temporal_from_stride, STEPS_PER_CYCLE};
pub use wavelet::{normalized_silhouette, subband_energies, wavelet_features, WAVELET_SIDE};

use crate::error::{Error, Result};
use crate::gaitcycle::GaitCycle;
use crate::scalar::Scalar;
use crate::segmentation::SilhouetteMask;

pub const SPATIAL_DIM: usize = 4;
pub const TEMPORAL_DIM: usize = 4;
pub const WAVELET_DIM: usize = 6;
pub const FUSED_DIM: usize = SPATIAL_DIM + TEMPORAL_DIM + WAVELET_DIM;

/// Column names of the fused vector, in order.
pub const FEATURE_NAMES: [&str; FUSED_DIM] = [
    "mean_height",
    "mean_width",
    "mean_angle",
    "mean_aspect_ratio",
    "stride_length",
    "step_length",
    "cadence",
    "velocity",
    "mu_ll",
    "sigma_ll",
    "mu_lh",
    "sigma_lh",
    "mu_hl",
    "sigma_hl",
];

/// Fused descriptor `[spatial, temporal, wavelet]`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FeatureVector<T> {
    pub spatial: [T; SPATIAL_DIM],
    pub temporal: [T; TEMPORAL_DIM],
    pub wavelet: [T; WAVELET_DIM],
}

impl<T: Scalar> FeatureVector<T> {
    pub fn fused(&self) -> Vec<T> {
        let mut v = Vec::with_capacity(FUSED_DIM);
        v.extend_from_slice(&self.spatial);
        v.extend_from_slice(&self.temporal);
        v.extend_from_slice(&self.wavelet);
        v
    }

    pub fn from_fused(values: &[T]) -> Result<Self> {
        if values.len() != FUSED_DIM {
            return Err(Error::BadComponentLength(format!("fused vector has {} values, expected {FUSED_DIM}", values.len())));
        }
        fuse(&values[..4], &values[4..8], &values[8..])
    }
}

/// Concatenates the three components, checking their lengths.
pub fn fuse<T: Scalar>(spatial: &[T], temporal: &[T], wavelet: &[T]) -> Result<FeatureVector<T>> {
    let lens = (spatial.len(), temporal.len(), wavelet.len());
    if lens != (SPATIAL_DIM, TEMPORAL_DIM, WAVELET_DIM) {
        return Err(Error::BadComponentLength(format!(
            "component lengths {lens:?}, expected ({SPATIAL_DIM}, {TEMPORAL_DIM}, {WAVELET_DIM})"
        )));
    }
    Ok(FeatureVector {
        spatial: spatial.try_into().expect("length checked"),
        temporal: temporal.try_into().expect("length checked"),
        wavelet: wavelet.try_into().expect("length checked"),
    })
}

/// Which feature blocks are fed to the classifier.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum FeatureSet {
    Spatial,
    Temporal,
    Wavelet,
    SpatialTemporal,
    SpatialWavelet,
    All,
}

impl FeatureSet {
    /// Ablation rows in reporting order.
    pub const ABLATION: [FeatureSet; 6] = [
        FeatureSet::Spatial,
        FeatureSet::Temporal,
        FeatureSet::Wavelet,
        FeatureSet::SpatialTemporal,
        FeatureSet::SpatialWavelet,
        FeatureSet::All,
    ];

    pub fn name(&self) -> &'static str {
        match self {
            FeatureSet::Spatial => "spatial",
            FeatureSet::Temporal => "temporal",
            FeatureSet::Wavelet => "wavelet",
            FeatureSet::SpatialTemporal => "spatial+temporal",
            FeatureSet::SpatialWavelet => "spatial+wavelet",
            FeatureSet::All => "spatial+temporal+wavelet",
        }
    }

    fn blocks(&self) -> (bool, bool, bool) {
        match self {
            FeatureSet::Spatial => (true, false, false),
            FeatureSet::Temporal => (false, true, false),
            FeatureSet::Wavelet => (false, false, true),
            FeatureSet::SpatialTemporal => (true, true, false),
            FeatureSet::SpatialWavelet => (true, false, true),
            FeatureSet::All => (true, true, true),
        }
    }

    pub fn dim(&self) -> usize {
        let (s, t, w) = self.blocks();
        usize::from(s) * SPATIAL_DIM + usize::from(t) * TEMPORAL_DIM + usize::from(w) * WAVELET_DIM
    }

    pub fn project<T: Scalar>(&self, fv: &FeatureVector<T>) -> Vec<T> {
        let (s, t, w) = self.blocks();
        let mut v = Vec::with_capacity(self.dim());
        if s {
            v.extend_from_slice(&fv.spatial);
        }
        if t {
            v.extend_from_slice(&fv.temporal);
        }
        if w {
            v.extend_from_slice(&fv.wavelet);
        }
        v
    }
}

/// Computes the fused descriptor over the frames covered by `window` (consecutive cycles).
pub fn extract<T: Scalar>(masks: &[SilhouetteMask], window: &[GaitCycle], fps: T) -> Result<FeatureVector<T>> {
    let (Some(first), Some(last)) = (window.first(), window.last()) else {
        return Err(Error::EmptyWindow);
    };
    if last.end_frame >= masks.len() {
        return Err(Error::SequenceTooShort { needed: last.end_frame + 1, got: masks.len() });
    }
    let frames = &masks[first.start_frame..=last.end_frame];
    let boxes: Vec<_> = frames.iter().map(|m| m.bbox()).collect();
    let centroids: Vec<Option<T>> = frames.iter().map(|m| m.centroid_x().and_then(T::from_f64)).collect();
    let spatial = spatial_features(&boxes)?;
    let temporal = temporal_features(&centroids, first.period_frames, fps)?;
    let wavelet = wavelet_features(frames)?;
    Ok(FeatureVector { spatial, temporal, wavelet })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn fuse_lengths() {
        let fv = fuse(&[1.0f64; 4], &[2.0; 4], &[3.0; 6]).unwrap();
        assert_eq!(fv.fused().len(), 14);
        assert_eq!(FeatureVector::from_fused(&fv.fused()).unwrap(), fv);
        assert!(matches!(fuse(&[1.0f64; 4], &[2.0; 3], &[3.0; 6]), Err(Error::BadComponentLength(_))));
    }

    #[test]
    fn ablation_dimensions() {
        let dims: Vec<usize> = FeatureSet::ABLATION.iter().map(|s| s.dim()).collect();
        assert_eq!(dims, vec![4, 4, 6, 8, 10, 14]);
        let fv = fuse(&[1.0f64; 4], &[2.0; 4], &[3.0; 6]).unwrap();
        for set in FeatureSet::ABLATION {
            assert_eq!(set.project(&fv).len(), set.dim());
        }
        assert_eq!(FeatureSet::SpatialWavelet.project(&fv)[4], 3.0);
        assert_eq!(FeatureSet::All.project(&fv), fv.fused());
    }

    #[test]
    fn names_match_dimension() {
        assert_eq!(FEATURE_NAMES.len(), FUSED_DIM);
    }
}
