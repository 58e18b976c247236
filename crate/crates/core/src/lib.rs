//! Soft-margin kernel support vector machines.
//!
//! * [`kernel`]: kernel functions and Gram matrices.
//! * [`solver`]: the dual quadratic program and its KKT diagnostics.
//! * [`svm`]: training, bias recovery, the decision function and model files.
//! * [`srm`]: empirical risk, the VC confidence bound and degree selection.
//! * [`data`]: UCI loaders, synthetic 2D problems and train/test splits.
//! * [`eval`]: error rates, training-size sweeps and decision grids.

pub mod data;
mod dataset;
mod error;
pub mod eval;
pub mod kernel;
pub mod solver;
pub mod srm;
pub mod svm;

pub use dataset::{Dataset, Label, Sample};
pub use error::{Error, Result};
pub use kernel::{KernelKind, KernelSpec};
pub use solver::{SolverConfig, SolverSolution};
pub use svm::Model;
