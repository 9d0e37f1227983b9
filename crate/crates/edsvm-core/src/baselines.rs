//! Benchmark models: C-SVM, LS-SVM, and LINEX-SVM.
//!
//! The LS-SVM here is the inequality-constrained squared-slack variant, fit
//! as the omega = 1 reduction of the squared-slack elite dual so one code
//! path serves both. LINEX-SVM is fit in the primal by gradient descent with
//! backtracking, since its smooth loss admits no finite-dimensional dual of
//! the shared form.

use std::collections::BTreeMap;
use std::sync::Arc;

use crate::edsvm::{self, EdsvmConfig, EdsvmFit, EdsvmVariant, FitOptions};
use crate::elite::EliteGuide;
use crate::error::EdsvmError;
use crate::kernel::{Dataset, GramMatrix, KernelSpec};
use crate::model::{ModelVariant, TrainedModel};

/// Standard soft-margin hinge SVM with box `[0, C]`.
pub fn fit_csvm(
    data: &Arc<Dataset>,
    c: f64,
    kernel: &KernelSpec,
) -> Result<TrainedModel, EdsvmError> {
    fit_csvm_with(data, c, kernel, FitOptions::default(), None).map(|f| f.model)
}

pub fn fit_csvm_with(
    data: &Arc<Dataset>,
    c: f64,
    kernel: &KernelSpec,
    opts: FitOptions,
    gram: Option<&GramMatrix>,
) -> Result<EdsvmFit, EdsvmError> {
    let (solution, beta0, _qp) = edsvm::fit_hinge_box(data, c, kernel, opts, gram)?;
    let mut hyper = BTreeMap::new();
    hyper.insert("C".into(), c);
    let model = TrainedModel {
        variant: ModelVariant::Csvm,
        kernel: *kernel,
        alpha: solution.alpha.clone(),
        beta0,
        train: Arc::clone(data),
        hyper,
        elite: None,
    };
    Ok(EdsvmFit { model, solution })
}

/// Squared-slack SVM with nonnegativity constraints on the slacks.
pub fn fit_lssvm(
    data: &Arc<Dataset>,
    c: f64,
    kernel: &KernelSpec,
) -> Result<TrainedModel, EdsvmError> {
    fit_lssvm_with(data, c, kernel, FitOptions::default(), None).map(|f| f.model)
}

pub fn fit_lssvm_with(
    data: &Arc<Dataset>,
    c: f64,
    kernel: &KernelSpec,
    opts: FitOptions,
    gram: Option<&GramMatrix>,
) -> Result<EdsvmFit, EdsvmError> {
    let cfg = EdsvmConfig {
        c,
        omega: 1.0,
        guide: EliteGuide::empty(),
        variant: EdsvmVariant::Lsedsvm,
        kernel: *kernel,
    };
    let mut fit = edsvm::fit_edsvm_with(data, &cfg, opts, gram)?;
    fit.model.variant = ModelVariant::Lssvm;
    fit.model.hyper.remove("omega");
    fit.model.elite = None;
    Ok(fit)
}

/// Per-margin LINEX loss `exp(a(1-z)) - a(1-z) - 1`.
pub fn linex_loss(z: f64, a: f64) -> f64 {
    let t = a * (1.0 - z);
    t.exp() - t - 1.0
}

fn linex_loss_deriv(z: f64, a: f64) -> f64 {
    // d/dz [exp(a(1-z)) - a(1-z) - 1] = a - a*exp(a(1-z)).
    a * (1.0 - (a * (1.0 - z)).exp())
}

const LINEX_GRAD_TOL: f64 = 1e-8;
const LINEX_MAX_ITER: usize = 100_000;
const LINEX_EXP_CAP: f64 = 700.0;
const BACKTRACK_SHRINK: f64 = 0.5;
const ARMIJO: f64 = 1e-4;

/// LINEX-SVM: minimizes `1/2 c'Kc + C * sum_i linex(u_i)` over representer
/// coefficients `c` and the intercept, with `u_i = y_i (b + (Kc)_i)`.
///
/// Linear kernels are optimized directly in `(beta0, beta)`; the representer
/// coefficients are tracked alongside so the returned model still uses the
/// shared kernel expansion.
pub fn fit_linexsvm(
    data: &Arc<Dataset>,
    c: f64,
    a: f64,
    kernel: &KernelSpec,
) -> Result<TrainedModel, EdsvmError> {
    fit_linexsvm_with(data, c, a, kernel, None)
}

pub fn fit_linexsvm_with(
    data: &Arc<Dataset>,
    c: f64,
    a: f64,
    kernel: &KernelSpec,
    gram: Option<&GramMatrix>,
) -> Result<TrainedModel, EdsvmError> {
    if a == 0.0 || !a.is_finite() {
        return Err(EdsvmError::InvalidHyper("LINEX parameter a must be nonzero".into()));
    }
    if c.is_nan() || c <= 0.0 || c.is_infinite() {
        return Err(EdsvmError::InvalidHyper(format!("C must be positive, got {c}")));
    }
    kernel.validate()?;

    let (coeffs, beta0) = if matches!(kernel, KernelSpec::Linear) {
        linex_descent_linear(data, c, a)?
    } else {
        let owned;
        let gram = match gram {
            Some(g) => g,
            None => {
                owned = GramMatrix::compute(kernel, data.features())?;
                &owned
            }
        };
        linex_descent_kernel(data, c, a, gram)?
    };

    // Representer coefficients c_j map onto the shared expansion via
    // alpha_j = y_j c_j, so that alpha_j y_j K(x_j, x) = c_j K(x_j, x).
    let alpha: Vec<f64> = coeffs
        .iter()
        .zip(data.labels())
        .map(|(&cj, &yj)| yj * cj)
        .collect();
    let mut hyper = BTreeMap::new();
    hyper.insert("C".into(), c);
    hyper.insert("a".into(), a);
    Ok(TrainedModel {
        variant: ModelVariant::LinexSvm,
        kernel: *kernel,
        alpha,
        beta0,
        train: Arc::clone(data),
        hyper,
        elite: None,
    })
}

/// Objective and margins for the kernel parametrization; `None` signals an
/// overflowing exponent (treated as +infinity by the line search).
fn linex_objective_kernel(
    kc: &[f64],
    coeffs: &[f64],
    beta0: f64,
    labels: &[f64],
    c: f64,
    a: f64,
) -> Option<f64> {
    let mut quad = 0.0;
    let mut loss = 0.0;
    for i in 0..coeffs.len() {
        quad += coeffs[i] * kc[i];
        let u = labels[i] * (beta0 + kc[i]);
        if a * (1.0 - u) > LINEX_EXP_CAP {
            return None;
        }
        loss += linex_loss(u, a);
    }
    Some(0.5 * quad + c * loss)
}

fn linex_descent_kernel(
    data: &Dataset,
    c: f64,
    a: f64,
    gram: &GramMatrix,
) -> Result<(Vec<f64>, f64), EdsvmError> {
    let n = data.len();
    let labels = data.labels();
    let mut coeffs = vec![0.0; n];
    let mut beta0 = 0.0;
    let mut kc = vec![0.0; n];
    let mut obj = linex_objective_kernel(&kc, &coeffs, beta0, labels, c, a)
        .ok_or_else(|| EdsvmError::NonConvergence("LINEX overflow at the origin".into()))?;

    let mut step = 1.0 / (1.0 + c * a * a);
    let mut prev_grad: Option<(Vec<f64>, f64)> = None;
    let mut prev_point: Option<(Vec<f64>, f64)> = None;

    for iter in 0..LINEX_MAX_ITER {
        // The cached K*c is updated linearly inside the line search;
        // recompute it periodically to cancel accumulated drift.
        if iter % 512 == 511 {
            for (i, v) in kc.iter_mut().enumerate() {
                *v = crate::matrix::dot(gram.row(i), &coeffs);
            }
        }
        // w_i = y_i * linex'(u_i). The Euclidean gradient in c is
        // K(c + Cw); descending along -(c + Cw) instead (steepest descent in
        // the RKHS inner product) removes K's small eigenvalues from the
        // conditioning while staying a descent direction, since
        // d'grad = -(c+Cw)'K(c+Cw) <= 0.
        let mut w = vec![0.0; n];
        let mut grad_b = 0.0;
        for i in 0..n {
            let u = labels[i] * (beta0 + kc[i]);
            let d = labels[i] * linex_loss_deriv(u, a);
            w[i] = d;
            grad_b += d;
        }
        grad_b *= c;
        let resid: Vec<f64> = (0..n).map(|i| coeffs[i] + c * w[i]).collect();
        // One matvec per iteration: K * resid is the Euclidean gradient and
        // also drives the cached K*c update along the search direction.
        let kresid: Vec<f64> =
            (0..n).map(|i| crate::matrix::dot(gram.row(i), &resid)).collect();

        let grad_norm_sq = kresid.iter().map(|g| g * g).sum::<f64>() + grad_b * grad_b;
        if grad_norm_sq.sqrt() <= LINEX_GRAD_TOL {
            return Ok((coeffs, beta0));
        }
        // Directional derivative along (-resid, -grad_b).
        let dir_deriv = -(resid.iter().zip(&kresid).map(|(r, kr)| r * kr).sum::<f64>()
            + grad_b * grad_b);

        // Barzilai-Borwein step from preconditioned-gradient differences,
        // safeguarded by backtracking.
        if let (Some((pg, pgb)), Some((pc, pb))) = (&prev_grad, &prev_point) {
            let mut sy = 0.0;
            let mut yy = 0.0;
            for i in 0..n {
                let s = coeffs[i] - pc[i];
                let yv = resid[i] - pg[i];
                sy += s * yv;
                yy += yv * yv;
            }
            let s = beta0 - pb;
            let yv = grad_b - pgb;
            sy += s * yv;
            yy += yv * yv;
            if yy > 0.0 && sy > 0.0 {
                step = (sy / yy).clamp(1e-12, 1e6);
            }
        }
        prev_grad = Some((resid.clone(), grad_b));
        prev_point = Some((coeffs.clone(), beta0));

        let mut t = step;
        let mut accepted = false;
        for _ in 0..200 {
            let cand: Vec<f64> = (0..n).map(|i| coeffs[i] - t * resid[i]).collect();
            let cand_b = beta0 - t * grad_b;
            let cand_kc: Vec<f64> = (0..n).map(|i| kc[i] - t * kresid[i]).collect();
            if let Some(cand_obj) = linex_objective_kernel(&cand_kc, &cand, cand_b, labels, c, a) {
                if cand_obj <= obj + ARMIJO * t * dir_deriv + 1e-12 * (1.0 + obj.abs()) {
                    coeffs = cand;
                    beta0 = cand_b;
                    kc = cand_kc;
                    obj = cand_obj;
                    accepted = true;
                    break;
                }
            }
            t *= BACKTRACK_SHRINK;
        }
        if !accepted {
            return Err(EdsvmError::NonConvergence(
                "LINEX line search failed to find a decreasing step".into(),
            ));
        }
    }
    Err(EdsvmError::NonConvergence(format!(
        "LINEX gradient descent did not reach tolerance within {LINEX_MAX_ITER} iterations"
    )))
}

/// Direct `(beta0, beta)` optimization for the linear kernel. The representer
/// coefficients are mirrored through the identical update `c <- c - t(c + Cw)`
/// which keeps `beta = X'c` exact at every iterate.
fn linex_descent_linear(data: &Dataset, c: f64, a: f64) -> Result<(Vec<f64>, f64), EdsvmError> {
    let n = data.len();
    let p = data.dim();
    let labels = data.labels();
    let x = data.features();

    let objective = |beta: &[f64], beta0: f64| -> Option<f64> {
        let mut quad = 0.0;
        for b in beta {
            quad += b * b;
        }
        let mut loss = 0.0;
        for (i, &yi) in labels.iter().enumerate() {
            let u = yi * (beta0 + crate::matrix::dot(x.row(i), beta));
            if a * (1.0 - u) > LINEX_EXP_CAP {
                return None;
            }
            loss += linex_loss(u, a);
        }
        Some(0.5 * quad + c * loss)
    };

    let mut beta = vec![0.0; p];
    let mut beta0 = 0.0;
    let mut coeffs = vec![0.0; n];
    let mut obj = objective(&beta, beta0)
        .ok_or_else(|| EdsvmError::NonConvergence("LINEX overflow at the origin".into()))?;

    let mut step = 1.0 / (1.0 + c * a * a * n as f64);
    let mut prev_grad: Option<(Vec<f64>, f64)> = None;
    let mut prev_point: Option<(Vec<f64>, f64)> = None;

    for _ in 0..LINEX_MAX_ITER {
        let mut w = vec![0.0; n];
        let mut grad_b = 0.0;
        for (i, &yi) in labels.iter().enumerate() {
            let u = yi * (beta0 + crate::matrix::dot(x.row(i), &beta));
            let d = yi * linex_loss_deriv(u, a);
            w[i] = d;
            grad_b += d;
        }
        grad_b *= c;
        let mut grad = beta.clone();
        for (i, &wi) in w.iter().enumerate() {
            let wi = c * wi;
            for (g, &xe) in grad.iter_mut().zip(x.row(i)) {
                *g += wi * xe;
            }
        }
        let grad_norm = (grad.iter().map(|g| g * g).sum::<f64>() + grad_b * grad_b).sqrt();
        if grad_norm <= LINEX_GRAD_TOL {
            return Ok((coeffs, beta0));
        }

        if let (Some((pg, pgb)), Some((pp, pb))) = (&prev_grad, &prev_point) {
            let mut sy = 0.0;
            let mut yy = 0.0;
            for i in 0..p {
                let s = beta[i] - pp[i];
                let yv = grad[i] - pg[i];
                sy += s * yv;
                yy += yv * yv;
            }
            let s = beta0 - pb;
            let yv = grad_b - pgb;
            sy += s * yv;
            yy += yv * yv;
            if yy > 0.0 && sy > 0.0 {
                step = (sy / yy).clamp(1e-12, 1e6);
            }
        }
        prev_grad = Some((grad.clone(), grad_b));
        prev_point = Some((beta.clone(), beta0));

        let mut t = step;
        let mut accepted = false;
        for _ in 0..200 {
            let cand: Vec<f64> = (0..p).map(|i| beta[i] - t * grad[i]).collect();
            let cand_b = beta0 - t * grad_b;
            if let Some(cand_obj) = objective(&cand, cand_b) {
                if cand_obj <= obj - ARMIJO * t * grad_norm * grad_norm + 1e-12 * (1.0 + obj.abs()) {
                    // Mirror the update in representer space.
                    for i in 0..n {
                        coeffs[i] = (1.0 - t) * coeffs[i] - t * c * w[i];
                    }
                    beta = cand;
                    beta0 = cand_b;
                    obj = cand_obj;
                    accepted = true;
                    break;
                }
            }
            t *= BACKTRACK_SHRINK;
        }
        if !accepted {
            return Err(EdsvmError::NonConvergence(
                "LINEX line search failed to find a decreasing step".into(),
            ));
        }
    }
    Err(EdsvmError::NonConvergence(format!(
        "LINEX gradient descent did not reach tolerance within {LINEX_MAX_ITER} iterations"
    )))
}

/// Hinge slacks `xi_i = max(0, 1 - y_i f(x_i))` on the model's training set.
pub fn extract_slacks(model: &TrainedModel) -> Result<Vec<f64>, EdsvmError> {
    Ok(model
        .margin_deviations()?
        .into_iter()
        .map(|d| d.max(0.0))
        .collect())
}

/// Support vectors: nonzero dual coefficients for dual-fitted variants; for
/// the primal-fitted LINEX model, the margin-active proxy
/// `y_i f(x_i) <= 1 + eps`, which coincides with the dual characterization
/// for hinge models.
pub fn support_indices(model: &TrainedModel, eps: f64) -> Result<Vec<usize>, EdsvmError> {
    match model.variant {
        ModelVariant::LinexSvm => {
            let dev = model.margin_deviations()?;
            // y f <= 1 + eps  <=>  1 - y f >= -eps.
            Ok(dev
                .iter()
                .enumerate()
                .filter_map(|(i, &d)| (d >= -eps).then_some(i))
                .collect())
        }
        _ => Ok(model
            .alpha
            .iter()
            .enumerate()
            .filter_map(|(i, &a)| (a > eps).then_some(i))
            .collect()),
    }
}
