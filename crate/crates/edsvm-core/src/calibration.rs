//! Induced margin losses of the elite-driven variants and their
//! classification-calibration checks.
//!
//! For an elite point with target slack `xi*`, minimizing the per-point
//! objective over feasible slacks yields a margin loss `phi(u) = g(xi(u))`
//! with `xi(u) = max{0, 1-u, xi_bar}`, where `xi_bar` is the unconstrained
//! minimizer of the slack penalty `g`. Calibration holds when `phi` is convex
//! with `phi'(0) < 0`, which reduces to a strict threshold on `xi*`.

use serde::{Deserialize, Serialize};

use crate::edsvm::EdsvmVariant;
use crate::elite::EliteGuide;

/// Unconstrained slack minimizer of the hinge-variant elite penalty.
pub fn xi_bar_cedsvm(xi_star: f64, omega: f64) -> f64 {
    xi_star - omega / (2.0 * (1.0 - omega))
}

/// Unconstrained slack minimizer of the squared-slack-variant elite penalty.
pub fn xi_bar_lsedsvm(xi_star: f64, omega: f64) -> f64 {
    (1.0 - omega) * xi_star
}

/// Elite margin loss of the hinge variant:
/// `omega*xi + (1-omega)*(xi - xi*)^2` at `xi = max{0, 1-u, xi_bar}`.
pub fn induced_loss_cedsvm(u: f64, xi_star: f64, omega: f64) -> f64 {
    let xi = (1.0 - u).max(0.0).max(xi_bar_cedsvm(xi_star, omega));
    omega * xi + (1.0 - omega) * (xi - xi_star) * (xi - xi_star)
}

/// Elite margin loss of the squared-slack variant:
/// `omega*xi^2 + (1-omega)*(xi - xi*)^2` at `xi = max{0, 1-u, xi_bar}`.
pub fn induced_loss_lsedsvm(u: f64, xi_star: f64, omega: f64) -> f64 {
    let xi = (1.0 - u).max(0.0).max(xi_bar_lsedsvm(xi_star, omega));
    omega * xi * xi + (1.0 - omega) * (xi - xi_star) * (xi - xi_star)
}

/// Non-elite margin loss of the hinge variant: a scaled hinge.
pub fn non_elite_loss_cedsvm(u: f64, omega: f64) -> f64 {
    omega * (1.0 - u).max(0.0)
}

/// Non-elite margin loss of the squared-slack variant: a scaled squared hinge.
pub fn non_elite_loss_lsedsvm(u: f64, omega: f64) -> f64 {
    let h = (1.0 - u).max(0.0);
    omega * h * h
}

/// Calibration threshold on the target slack for the given variant.
pub fn calibration_threshold(variant: EdsvmVariant, omega: f64) -> f64 {
    match variant {
        EdsvmVariant::Cedsvm => 1.0 + omega / (2.0 * (1.0 - omega)),
        EdsvmVariant::Lsedsvm => 1.0 / (1.0 - omega),
    }
}

/// Closed-form derivative of the induced loss at `u = 0`.
///
/// In the active regime (`xi_bar < 1`) the margin constraint pins the slack
/// and the derivative comes from the penalty; when `xi_bar > 1` the loss is
/// locally constant around zero and the derivative vanishes. At exactly
/// `xi_bar = 1` the loss has a kink reported via [`PhiPrimeAtZero::Kink`].
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "lowercase")]
pub enum PhiPrimeAtZero {
    Value { value: f64 },
    Kink { left: f64, right: f64 },
}

impl PhiPrimeAtZero {
    /// The derivative when it exists.
    pub fn value(&self) -> Option<f64> {
        match *self {
            PhiPrimeAtZero::Value { value } => Some(value),
            PhiPrimeAtZero::Kink { .. } => None,
        }
    }
}

pub fn phi_prime_at_zero(variant: EdsvmVariant, xi_star: f64, omega: f64) -> PhiPrimeAtZero {
    let (xi_bar, active_form) = match variant {
        EdsvmVariant::Cedsvm => (
            xi_bar_cedsvm(xi_star, omega),
            -omega + 2.0 * (1.0 - omega) * (xi_star - 1.0),
        ),
        EdsvmVariant::Lsedsvm => (
            xi_bar_lsedsvm(xi_star, omega),
            2.0 * ((1.0 - omega) * xi_star - 1.0),
        ),
    };
    if xi_bar < 1.0 {
        PhiPrimeAtZero::Value { value: active_form }
    } else if xi_bar > 1.0 {
        PhiPrimeAtZero::Value { value: 0.0 }
    } else {
        // Left of zero the margin branch is active; right of zero the loss
        // is pinned at xi_bar.
        PhiPrimeAtZero::Kink { left: active_form, right: 0.0 }
    }
}

/// Per-elite calibration outcome.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct CalibrationEntry {
    pub index: usize,
    pub xi_star: f64,
    pub satisfied: bool,
    pub phi_prime_at_zero: PhiPrimeAtZero,
}

/// Calibration check over a whole elite guide.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct CalibrationReport {
    pub variant: EdsvmVariant,
    pub omega: f64,
    pub threshold: f64,
    pub entries: Vec<CalibrationEntry>,
    pub all_satisfied: bool,
}

/// Compares every elite target against the variant threshold (strict
/// inequality) and reports the closed-form derivative at zero.
pub fn check_calibration(guide: &EliteGuide, omega: f64, variant: EdsvmVariant) -> CalibrationReport {
    let threshold = calibration_threshold(variant, omega);
    let entries: Vec<CalibrationEntry> = guide
        .elite
        .iter()
        .zip(&guide.targets)
        .map(|(&index, &xi_star)| CalibrationEntry {
            index,
            xi_star,
            satisfied: xi_star < threshold,
            phi_prime_at_zero: phi_prime_at_zero(variant, xi_star, omega),
        })
        .collect();
    let all_satisfied = entries.iter().all(|e| e.satisfied);
    CalibrationReport { variant, omega, threshold, entries, all_satisfied }
}
