//! Multi-class kernel SVM: linear, polynomial and RBF kernels, an SMO dual solver, one-vs-one
//! voting over z-scored features and a versioned text model format.

mod kernel;
mod multiclass;
mod persist;
mod smo;

pub use kernel::{kernel_eval, Kernel, KernelKind, KernelSpec};
pub use multiclass::{train_multiclass, train_multiclass_with_report, MachineReport, Normalizer, PairwiseSvm, SvmModel};
pub use persist::{load_model, model_from_str, model_to_string, save_model, MAGIC, VERSION};
pub use smo::{fit_binary, kkt_violation, train_binary, BinaryFit, BinarySvm, SmoParams};
