//! Gait recognition from side-view silhouette sequences.
//!
//! The pipeline runs background estimation ([`background`]), frame differencing and silhouette
//! cleanup ([`segmentation`]), gait-period estimation from the bounding-box width
//! ([`gaitcycle`]), spatial/temporal/wavelet feature extraction ([`features`]) and a
//! one-vs-one kernel SVM ([`svm`]). [`synth`] renders walkers with known ground truth and
//! [`pipeline`] wires everything together, including the ablation and kernel-sweep harnesses.
//!
//! Numeric code is generic over [`Scalar`] (`f32` or `f64`); the aliases below fix the
//! precision for common use.

pub mod background;
pub mod config;
pub mod error;
pub mod features;
pub mod gaitcycle;
pub mod imagery;
pub mod metrics;
pub mod pipeline;
pub mod scalar;
pub mod segmentation;
pub mod svm;
pub mod synth;
pub mod threshold;

pub use error::{Error, Result, Stage};
pub use scalar::Scalar;

pub type FeatureVectorF64 = features::FeatureVector<f64>;
pub type FeatureVectorF32 = features::FeatureVector<f32>;
pub type KernelSpecF64 = svm::KernelSpec<f64>;
pub type KernelSpecF32 = svm::KernelSpec<f32>;
pub type SvmModelF64 = svm::SvmModel<f64>;
pub type SvmModelF32 = svm::SvmModel<f32>;
pub type WidthSignalF64 = gaitcycle::WidthSignal<f64>;
pub type MeasuresF64 = metrics::Measures<f64>;
