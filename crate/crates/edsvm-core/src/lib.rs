//! Kernel SVM library with benchmark-guided slack regularization.
//!
//! Implements the classical soft-margin machinery (C-SVM, LS-SVM, LINEX-SVM)
//! together with two elite-driven variants (C-EDSVM, LS-EDSVM) that shrink
//! the slack variables of selected "elite" training points toward target
//! slack values supplied by benchmark models. All dual problems share the
//! form `max -1/2 a'Qa + R'a + D` with an equality constraint `a'y = 0` and
//! per-coordinate bounds, solved by a generalized SMO ([`qp::solve_smo`])
//! with a projected-gradient reference solver ([`qp::solve_reference`]) kept
//! around for cross-checks.

pub mod baselines;
pub mod calibration;
pub mod diagnostics;
pub mod edsvm;
pub mod elite;
pub mod error;
pub mod kernel;
pub mod matrix;
pub mod model;
pub mod qp;

pub use error::EdsvmError;
pub use kernel::{Dataset, GramMatrix, KernelSpec};
pub use matrix::Matrix;
pub use model::{ModelVariant, TrainedModel};
