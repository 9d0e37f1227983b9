//! Elite-driven SVM variants: dual construction, fitting, intercept and
//! slack recovery.
//!
//! Both variants minimize `1/2 |h|_K^2 + C * sum_i loss_i(xi_i)` subject to
//! the usual margin constraints, where elite points carry an extra quadratic
//! penalty `(xi_i - xi_i^*)^2` shrinking their slack toward a benchmark
//! target. The duals share the generic form solved by [`crate::qp`]:
//!
//! * hinge variant: elite coordinates gain diagonal `1/(2C(1-w))`, a shifted
//!   linear term, and lose their upper bound; non-elite coordinates keep the
//!   hinge box scaled to `C*w`.
//! * squared-slack variant: every coordinate gains a diagonal (`1/(2C)` for
//!   elite, `1/(2Cw)` otherwise) and elite linear terms shift by
//!   `(1-w) * xi^*`; no coordinate has an upper bound.

use std::collections::BTreeMap;
use std::sync::Arc;

use serde::{Deserialize, Serialize};

use crate::baselines;
use crate::elite::EliteGuide;
use crate::error::EdsvmError;
use crate::kernel::{Dataset, GramMatrix, KernelSpec};
use crate::matrix::Matrix;
use crate::model::{ModelVariant, TrainedModel};
use crate::qp::{self, DualQP, QPSolution};

/// Which elite-driven variant to fit.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum EdsvmVariant {
    Cedsvm,
    Lsedsvm,
}

/// Hyperparameters and guidance for one elite-driven fit.
#[derive(Debug, Clone)]
pub struct EdsvmConfig {
    pub c: f64,
    pub omega: f64,
    pub guide: EliteGuide,
    pub variant: EdsvmVariant,
    pub kernel: KernelSpec,
}

impl EdsvmConfig {
    pub fn validate(&self, n: usize) -> Result<(), EdsvmError> {
        if self.c.is_nan() || self.c <= 0.0 || self.c.is_infinite() {
            return Err(EdsvmError::InvalidHyper(format!("C must be positive, got {}", self.c)));
        }
        if !(self.omega > 0.0 && self.omega <= 1.0) {
            return Err(EdsvmError::InvalidHyper(format!(
                "omega must lie in (0, 1], got {}",
                self.omega
            )));
        }
        self.kernel.validate()?;
        self.guide.validate_for(n)?;
        Ok(())
    }
}

/// Solver knobs shared by every fit in this crate.
#[derive(Debug, Clone, Copy)]
pub struct FitOptions {
    pub tol: f64,
    pub max_iter: usize,
}

impl Default for FitOptions {
    fn default() -> Self {
        FitOptions { tol: qp::DEFAULT_TOL, max_iter: qp::DEFAULT_MAX_ITER }
    }
}

/// Per-coordinate slack structure, used for intercept and slack recovery.
#[derive(Debug, Clone, Copy)]
enum CoordKind {
    /// Hinge slack with box `[0, cap]`; slack is 0 while the multiplier is
    /// strictly inside the box and undetermined by alpha at the cap.
    Hinge { cap: f64 },
    /// Elite hinge coordinate: `xi(alpha) = max(0, xi* + (alpha/C - w)/(2(1-w)))`.
    EliteHinge { xi_star: f64 },
    /// Elite squared-slack coordinate: `xi(alpha) = alpha/(2C) + (1-w) xi*`.
    LsElite { xi_star: f64 },
    /// Plain squared-slack coordinate: `xi(alpha) = alpha/(2Cw)`.
    LsPlain,
}

fn elite_mask(guide: &EliteGuide, n: usize) -> (Vec<bool>, Vec<f64>) {
    let mut mask = vec![false; n];
    let mut target = vec![0.0; n];
    for (k, &i) in guide.elite.iter().enumerate() {
        mask[i] = true;
        target[i] = guide.targets[k];
    }
    (mask, target)
}

fn labeled_gram(data: &Dataset, gram: &GramMatrix) -> Matrix {
    let n = data.len();
    let y = data.labels();
    let mut h = Matrix::zeros(n, n);
    for i in 0..n {
        for j in 0..n {
            h.set(i, j, y[i] * y[j] * gram.get(i, j));
        }
    }
    h
}

fn coord_kinds(cfg: &EdsvmConfig, n: usize) -> Vec<CoordKind> {
    let (mask, target) = elite_mask(&cfg.guide, n);
    (0..n)
        .map(|i| match (cfg.variant, mask[i]) {
            (EdsvmVariant::Cedsvm, true) => CoordKind::EliteHinge { xi_star: target[i] },
            (EdsvmVariant::Cedsvm, false) => CoordKind::Hinge { cap: cfg.c * cfg.omega },
            (EdsvmVariant::Lsedsvm, true) => CoordKind::LsElite { xi_star: target[i] },
            (EdsvmVariant::Lsedsvm, false) => CoordKind::LsPlain,
        })
        .collect()
}

fn diag_terms(cfg: &EdsvmConfig, n: usize) -> Vec<f64> {
    let (mask, _) = elite_mask(&cfg.guide, n);
    (0..n)
        .map(|i| match (cfg.variant, mask[i]) {
            (EdsvmVariant::Cedsvm, true) => 1.0 / (2.0 * cfg.c * (1.0 - cfg.omega)),
            (EdsvmVariant::Cedsvm, false) => 0.0,
            (EdsvmVariant::Lsedsvm, true) => 1.0 / (2.0 * cfg.c),
            (EdsvmVariant::Lsedsvm, false) => 1.0 / (2.0 * cfg.c * cfg.omega),
        })
        .collect()
}

/// Slack implied by the stationarity conditions at a given multiplier value,
/// or `None` where alpha does not determine it (hinge coordinate at its cap).
fn slack_from_alpha(kind: CoordKind, alpha: f64, c: f64, omega: f64) -> Option<f64> {
    match kind {
        CoordKind::Hinge { cap } => {
            if alpha < cap {
                Some(0.0)
            } else {
                None
            }
        }
        // The stationarity slack is not clamped at zero: the quadratic dual
        // eliminates the slack without its nonnegativity multiplier, so a
        // negative value is the consistent reconstruction for elite points
        // whose penalty minimizer sits below zero.
        CoordKind::EliteHinge { xi_star } => {
            Some(xi_star + (alpha / c - omega) / (2.0 * (1.0 - omega)))
        }
        CoordKind::LsElite { xi_star } => Some(alpha / (2.0 * c) + (1.0 - omega) * xi_star),
        CoordKind::LsPlain => Some(alpha / (2.0 * c * omega)),
    }
}

/// Hinge dual of C-EDSVM; requires `omega` strictly inside `(0, 1)`.
pub fn build_cedsvm_dual(data: &Dataset, cfg: &EdsvmConfig) -> Result<DualQP, EdsvmError> {
    let gram = GramMatrix::compute(&cfg.kernel, data.features())?;
    build_cedsvm_dual_with_gram(data, cfg, &gram)
}

pub fn build_cedsvm_dual_with_gram(
    data: &Dataset,
    cfg: &EdsvmConfig,
    gram: &GramMatrix,
) -> Result<DualQP, EdsvmError> {
    cfg.validate(data.len())?;
    if cfg.variant != EdsvmVariant::Cedsvm {
        return Err(EdsvmError::InvalidHyper("config variant is not the hinge variant".into()));
    }
    if cfg.omega >= 1.0 {
        return Err(EdsvmError::InvalidHyper(
            "hinge dual requires omega < 1; omega = 1 is the plain-SVM path".into(),
        ));
    }
    let n = data.len();
    let (c, w) = (cfg.c, cfg.omega);
    let (mask, target) = elite_mask(&cfg.guide, n);
    let m = cfg.guide.len() as f64;

    let mut q = labeled_gram(data, gram);
    let mut r = vec![0.0; n];
    let mut upper = vec![0.0; n];
    for i in 0..n {
        if mask[i] {
            q.set(i, i, q.get(i, i) + 1.0 / (2.0 * c * (1.0 - w)));
            // Eliminating the elite slack from the Lagrangian gives the
            // linear coefficient 1 - xi* + w/(2(1-w)); the opposite sign on
            // the w term breaks strong duality (checked against hand-solved
            // instances and the projected-gradient oracle).
            r[i] = 1.0 - target[i] + w / (2.0 * (1.0 - w));
            upper[i] = f64::INFINITY;
        } else {
            r[i] = 1.0;
            upper[i] = c * w;
        }
    }
    let sum_targets: f64 = cfg.guide.targets.iter().sum();
    let d_const = -m * c * w * w / (4.0 * (1.0 - w)) + c * w * sum_targets;

    Ok(DualQP { q, r, d_const, y: data.labels().to_vec(), lower: vec![0.0; n], upper })
}

/// Squared-slack dual of LS-EDSVM; accepts any `omega` in `(0, 1]`.
pub fn build_lsedsvm_dual(data: &Dataset, cfg: &EdsvmConfig) -> Result<DualQP, EdsvmError> {
    let gram = GramMatrix::compute(&cfg.kernel, data.features())?;
    build_lsedsvm_dual_with_gram(data, cfg, &gram)
}

pub fn build_lsedsvm_dual_with_gram(
    data: &Dataset,
    cfg: &EdsvmConfig,
    gram: &GramMatrix,
) -> Result<DualQP, EdsvmError> {
    cfg.validate(data.len())?;
    if cfg.variant != EdsvmVariant::Lsedsvm {
        return Err(EdsvmError::InvalidHyper(
            "config variant is not the squared-slack variant".into(),
        ));
    }
    let n = data.len();
    let (c, w) = (cfg.c, cfg.omega);
    let (mask, target) = elite_mask(&cfg.guide, n);

    let mut q = labeled_gram(data, gram);
    let mut r = vec![0.0; n];
    for i in 0..n {
        if mask[i] {
            q.set(i, i, q.get(i, i) + 1.0 / (2.0 * c));
            r[i] = 1.0 - (1.0 - w) * target[i];
        } else {
            q.set(i, i, q.get(i, i) + 1.0 / (2.0 * c * w));
            r[i] = 1.0;
        }
    }
    // Substituting the elite stationarity slack back into the Lagrangian
    // leaves the constant C*w*(1-w)*sum(xi*^2); without the w factor the
    // reported dual objective exceeds the primal optimum.
    let d_const = c * w * (1.0 - w) * cfg.guide.targets.iter().map(|t| t * t).sum::<f64>();

    Ok(DualQP {
        q,
        r,
        d_const,
        y: data.labels().to_vec(),
        lower: vec![0.0; n],
        upper: vec![f64::INFINITY; n],
    })
}

/// Intercept recovery from KKT conditions.
///
/// Primary rule: average the intercept implied by `y_i (b + h_i) = 1 - xi_i`
/// over non-elite free points. Fallback when no such point exists: midpoint
/// of the interval that all KKT inequalities (and elite equalities) admit.
pub fn recover_intercept(
    qp: &DualQP,
    alpha: &[f64],
    data: &Dataset,
    cfg: &EdsvmConfig,
) -> Result<f64, EdsvmError> {
    let kinds = coord_kinds(cfg, data.len());
    let diag = diag_terms(cfg, data.len());
    recover_intercept_kinds(qp, alpha, &kinds, &diag, cfg.c, cfg.omega)
}

fn recover_intercept_kinds(
    qp: &DualQP,
    alpha: &[f64],
    kinds: &[CoordKind],
    diag: &[f64],
    c: f64,
    omega: f64,
) -> Result<f64, EdsvmError> {
    let n = qp.n();
    let qa = qp.q.matvec(alpha);
    // y_i * h(x_i) without the diagonal regularization term.
    let g: Vec<f64> = (0..n).map(|i| qa[i] - diag[i] * alpha[i]).collect();

    let alpha_scale = alpha.iter().fold(0.0f64, |m, &a| m.max(a.abs())).max(1.0);
    let mut free_sum = 0.0;
    let mut free_count = 0usize;
    for i in 0..n {
        let is_free = match kinds[i] {
            CoordKind::Hinge { cap } => {
                let tol = 1e-6 * cap;
                alpha[i] > tol && alpha[i] < cap - tol
            }
            CoordKind::LsPlain => {
                let tol = 1e-8 * alpha_scale;
                let xi = slack_from_alpha(kinds[i], alpha[i], c, omega).unwrap();
                alpha[i] > tol && xi > tol
            }
            // Elite points are excluded from the primary rule.
            _ => false,
        };
        if is_free {
            let xi = slack_from_alpha(kinds[i], alpha[i], c, omega).unwrap();
            free_sum += qp.y[i] * (1.0 - xi) - qp.y[i] * g[i];
            free_count += 1;
        }
    }
    if free_count > 0 {
        return Ok(free_sum / free_count as f64);
    }

    // Fallback: intersect the KKT-implied interval for the intercept.
    let mut lo = f64::NEG_INFINITY;
    let mut hi = f64::INFINITY;
    let act = 1e-9 * alpha_scale;
    for i in 0..n {
        // Constraint on y_i * b: equality, lower bound, or upper bound.
        let (value, kind_eq, kind_lo) = match kinds[i] {
            CoordKind::Hinge { cap } => {
                if alpha[i] <= act {
                    (1.0 - g[i], false, true)
                } else if alpha[i] >= cap - 1e-9 * cap {
                    (1.0 - g[i], false, false)
                } else {
                    (1.0 - g[i], true, true)
                }
            }
            CoordKind::EliteHinge { .. } | CoordKind::LsElite { .. } | CoordKind::LsPlain => {
                let xi = slack_from_alpha(kinds[i], alpha[i], c, omega).unwrap();
                if alpha[i] <= act {
                    (1.0 - xi - g[i], false, true)
                } else {
                    (1.0 - xi - g[i], true, true)
                }
            }
        };
        // Translate `y_i * b {=, >=, <=} value` into bounds on b.
        let b_bound = qp.y[i] * value;
        if kind_eq {
            lo = lo.max(b_bound);
            hi = hi.min(b_bound);
        } else if (qp.y[i] > 0.0) == kind_lo {
            lo = lo.max(b_bound);
        } else {
            hi = hi.min(b_bound);
        }
    }
    let span_tol = 1e-5 * lo.abs().max(hi.abs()).max(1.0);
    if lo > hi + span_tol {
        return Err(EdsvmError::Infeasible(format!(
            "empty intercept interval [{lo}, {hi}]; solution is inconsistent"
        )));
    }
    Ok(if lo.is_finite() && hi.is_finite() {
        0.5 * (lo + hi)
    } else if lo.is_finite() {
        lo
    } else if hi.is_finite() {
        hi
    } else {
        0.0
    })
}

/// Primal objective evaluated at the decision function induced by
/// `(alpha, beta0)`, with each slack set to its per-point optimum. Used for
/// duality-gap checks against [`DualQP::objective`].
pub fn primal_objective(
    data: &Dataset,
    cfg: &EdsvmConfig,
    alpha: &[f64],
    beta0: f64,
    gram: &GramMatrix,
) -> f64 {
    let n = data.len();
    let y = data.labels();
    let (mask, target) = elite_mask(&cfg.guide, n);
    let w = cfg.omega;

    // |h|_K^2 and margins via the labeled Gram matrix.
    let mut norm_sq = 0.0;
    let mut u = vec![beta0; n];
    for i in 0..n {
        let mut hi = 0.0;
        for j in 0..n {
            hi += alpha[j] * y[j] * gram.get(i, j);
        }
        norm_sq += alpha[i] * y[i] * hi;
        u[i] = y[i] * (beta0 + hi);
    }

    let mut loss = 0.0;
    for i in 0..n {
        match cfg.variant {
            EdsvmVariant::Cedsvm => {
                if mask[i] {
                    // Elite slack per the stationarity conditions, not the
                    // hinge truncation: the dual pairs with the elite slack
                    // eliminated unconstrained, so its optimum sits at
                    // max(1 - u, xi_bar) even when xi_bar is negative. At
                    // w = 1 the deviation term is gone and the slack is the
                    // plain hinge truncation.
                    let xi_bar = if w < 1.0 {
                        target[i] - w / (2.0 * (1.0 - w))
                    } else {
                        0.0
                    };
                    let xi = (1.0 - u[i]).max(xi_bar);
                    loss += w * xi + (1.0 - w) * (xi - target[i]) * (xi - target[i]);
                } else {
                    loss += w * (1.0 - u[i]).max(0.0);
                }
            }
            EdsvmVariant::Lsedsvm => {
                if mask[i] {
                    let xi = (1.0 - u[i]).max(0.0).max((1.0 - w) * target[i]);
                    loss += w * xi * xi + (1.0 - w) * (xi - target[i]) * (xi - target[i]);
                } else {
                    let xi = (1.0 - u[i]).max(0.0);
                    loss += w * xi * xi;
                }
            }
        }
    }
    0.5 * norm_sq + cfg.c * loss
}

/// Fit result bundling the model with its dual solve, so callers can audit
/// convergence and duality gaps.
#[derive(Debug, Clone)]
pub struct EdsvmFit {
    pub model: TrainedModel,
    pub solution: QPSolution,
}

/// Fits the configured variant with default solver options.
pub fn fit_edsvm(data: &Arc<Dataset>, cfg: &EdsvmConfig) -> Result<TrainedModel, EdsvmError> {
    fit_edsvm_with(data, cfg, FitOptions::default(), None).map(|f| f.model)
}

/// Fits with explicit solver options and an optional precomputed Gram matrix.
pub fn fit_edsvm_with(
    data: &Arc<Dataset>,
    cfg: &EdsvmConfig,
    opts: FitOptions,
    gram: Option<&GramMatrix>,
) -> Result<EdsvmFit, EdsvmError> {
    cfg.validate(data.len())?;

    // At omega = 1 the hinge-variant dual coefficients are singular; the
    // estimator reduces exactly to the plain C-SVM, so delegate.
    if cfg.variant == EdsvmVariant::Cedsvm && cfg.omega >= 1.0 {
        let mut fit = baselines::fit_csvm_with(data, cfg.c, &cfg.kernel, opts, gram)?;
        fit.model.variant = ModelVariant::Cedsvm;
        fit.model.hyper.insert("omega".into(), 1.0);
        fit.model.elite = Some(cfg.guide.clone());
        return Ok(fit);
    }

    let owned_gram;
    let gram = match gram {
        Some(g) => g,
        None => {
            owned_gram = GramMatrix::compute(&cfg.kernel, data.features())?;
            &owned_gram
        }
    };

    let qp = match cfg.variant {
        EdsvmVariant::Cedsvm => build_cedsvm_dual_with_gram(data, cfg, gram)?,
        EdsvmVariant::Lsedsvm => build_lsedsvm_dual_with_gram(data, cfg, gram)?,
    };
    let solution = qp::solve_smo(&qp, opts.tol, opts.max_iter)?;
    if !solution.converged {
        return Err(EdsvmError::NonConvergence(format!(
            "SMO stopped after {} pair updates with KKT residual {}",
            solution.iterations, solution.kkt_residual
        )));
    }
    let beta0 = recover_intercept(&qp, &solution.alpha, data, cfg)?;

    let mut hyper = BTreeMap::new();
    hyper.insert("C".into(), cfg.c);
    hyper.insert("omega".into(), cfg.omega);
    let model = TrainedModel {
        variant: match cfg.variant {
            EdsvmVariant::Cedsvm => ModelVariant::Cedsvm,
            EdsvmVariant::Lsedsvm => ModelVariant::Lsedsvm,
        },
        kernel: cfg.kernel,
        alpha: solution.alpha.clone(),
        beta0,
        train: Arc::clone(data),
        hyper,
        elite: Some(cfg.guide.clone()),
    };
    Ok(EdsvmFit { model, solution })
}

/// Hinge-box fit used by both the plain C-SVM and the omega = 1 reduction.
/// Lives here so the intercept recovery is shared with the elite variants.
pub(crate) fn fit_hinge_box(
    data: &Arc<Dataset>,
    cost: f64,
    kernel: &KernelSpec,
    opts: FitOptions,
    gram: Option<&GramMatrix>,
) -> Result<(QPSolution, f64, DualQP), EdsvmError> {
    if cost.is_nan() || cost <= 0.0 || cost.is_infinite() {
        return Err(EdsvmError::InvalidHyper(format!("C must be positive, got {cost}")));
    }
    kernel.validate()?;
    let owned_gram;
    let gram = match gram {
        Some(g) => g,
        None => {
            owned_gram = GramMatrix::compute(kernel, data.features())?;
            &owned_gram
        }
    };
    let n = data.len();
    let q = labeled_gram(data, gram);
    let qp = DualQP {
        q,
        r: vec![1.0; n],
        d_const: 0.0,
        y: data.labels().to_vec(),
        lower: vec![0.0; n],
        upper: vec![cost; n],
    };
    let solution = qp::solve_smo(&qp, opts.tol, opts.max_iter)?;
    if !solution.converged {
        return Err(EdsvmError::NonConvergence(format!(
            "SMO stopped after {} pair updates with KKT residual {}",
            solution.iterations, solution.kkt_residual
        )));
    }
    let kinds = vec![CoordKind::Hinge { cap: cost }; n];
    let diag = vec![0.0; n];
    let beta0 = recover_intercept_kinds(&qp, &solution.alpha, &kinds, &diag, cost, 1.0)?;
    Ok((solution, beta0, qp))
}
