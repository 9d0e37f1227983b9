//! Evaluation harness: classification metrics, stratified cross-validation,
//! grid search, the Gaussian-mixture simulation generator, and the full
//! experiment protocols.

pub mod experiment;
pub mod instances;
pub mod metrics;
pub mod cv;
pub mod simgen;
pub mod standardize;

pub use metrics::{compute_metrics, Metrics};
pub use cv::{stratified_kfold, GridSpec};
pub use simgen::MixtureSpec;
