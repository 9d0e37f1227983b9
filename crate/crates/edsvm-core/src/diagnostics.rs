//! Estimable theory quantities: benchmark-quality functionals, empirical
//! complexity radii, and the pre-training usefulness ratio.
//!
//! The population comparator is operationalized as a supplied reference fit
//! (typically cross-validated); every reported quantity is a deterministic
//! function of that reference, the elite guide, and the hyperparameters.

use serde::{Deserialize, Serialize, Serializer};

use crate::baselines::extract_slacks;
use crate::edsvm::EdsvmVariant;
use crate::elite::EliteGuide;
use crate::error::EdsvmError;
use crate::kernel::GramMatrix;
use crate::model::TrainedModel;

/// Mean squared deviation between the reference model's hinge slacks and the
/// supplied targets over the elite set.
pub fn benchmark_quality(reference: &TrainedModel, guide: &EliteGuide) -> Result<f64, EdsvmError> {
    if guide.is_empty() {
        return Err(EdsvmError::InvalidData(
            "benchmark quality is undefined for an empty elite set".into(),
        ));
    }
    guide.validate_for(reference.train.len())?;
    let slacks = extract_slacks(reference)?;
    let m = guide.len() as f64;
    let sum: f64 = guide
        .elite
        .iter()
        .zip(&guide.targets)
        .map(|(&i, &t)| {
            let d = slacks[i] - t;
            d * d
        })
        .sum();
    Ok(sum / m)
}

/// Squared RKHS norm of the kernel component, `(a o y)' K (a o y)`; the
/// intercept is excluded.
pub fn rkhs_norm_sq(model: &TrainedModel) -> Result<f64, EdsvmError> {
    let gram = GramMatrix::compute(&model.kernel, model.train.features())?;
    let y = model.train.labels();
    let n = model.train.len();
    let mut acc = 0.0;
    for i in 0..n {
        if model.alpha[i] == 0.0 {
            continue;
        }
        let ci = model.alpha[i] * y[i];
        for ((&aj, &yj), &k) in model.alpha.iter().zip(y).zip(gram.row(i)) {
            acc += ci * aj * yj * k;
        }
    }
    Ok(acc)
}

fn ser_ratio<S: Serializer>(v: &f64, s: S) -> Result<S::Ok, S::Error> {
    if v.is_finite() {
        s.serialize_f64(*v)
    } else {
        s.serialize_str("inf")
    }
}

/// Empirical radii and the pre-training diagnostic.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct DiagnosticsReport {
    pub variant: EdsvmVariant,
    pub n: usize,
    pub m: usize,
    pub c: f64,
    pub omega: f64,
    /// Elite-set benchmark mismatch under the hinge slack definition.
    pub e_m_star: f64,
    /// The same mismatch entering the squared-slack radius bound.
    pub e_m_star_ls: f64,
    /// Empirical hinge risk of the reference fit.
    pub hinge_risk_ref: f64,
    /// Empirical squared-hinge risk of the reference fit.
    pub ls_risk_ref: f64,
    /// Guided radius: `|f|_K^2 + 2Cnw R_hinge + 2Cm(1-w) E_m`.
    pub lambda_n_sq: f64,
    /// Unguided radius: `|f|_K^2 + 2Cn R_hinge`.
    pub lambda_svm_sq: f64,
    /// Squared-slack analogue of the guided radius.
    pub gamma_ls: f64,
    /// Squared-slack analogue of the unguided radius.
    pub gamma_ls_svm: f64,
    /// Pre-training diagnostic `m E_m / (n R_ref)` for the chosen variant;
    /// +inf when the risk vanishes but the mismatch does not.
    #[serde(serialize_with = "ser_ratio", deserialize_with = "de_ratio")]
    pub ratio: f64,
    /// Exact predicate `m E_m < n R_ref`: guidance shrinks the radius.
    pub benchmark_helpful: bool,
    /// Label recorded with the comparator per the reporting convention.
    pub comparator: String,
}

fn de_ratio<'de, D: serde::Deserializer<'de>>(d: D) -> Result<f64, D::Error> {
    use serde::de::Error;
    let v = serde_json::Value::deserialize(d)?;
    match v {
        serde_json::Value::Number(x) => x.as_f64().ok_or_else(|| D::Error::custom("bad ratio")),
        serde_json::Value::String(s) if s == "inf" => Ok(f64::INFINITY),
        _ => Err(D::Error::custom("bad ratio")),
    }
}

fn diagnostic_ratio(m: f64, e: f64, n: f64, risk: f64) -> f64 {
    let num = m * e;
    let den = n * risk;
    if den > 0.0 {
        num / den
    } else if num == 0.0 {
        0.0
    } else {
        f64::INFINITY
    }
}

/// Assembles the full report from a reference fit and an elite guide.
pub fn radii_report(
    reference: &TrainedModel,
    guide: &EliteGuide,
    c: f64,
    omega: f64,
    variant: EdsvmVariant,
) -> Result<DiagnosticsReport, EdsvmError> {
    if c.is_nan() || c <= 0.0 || omega.is_nan() || omega <= 0.0 || omega > 1.0 {
        return Err(EdsvmError::InvalidHyper(format!(
            "need C > 0 and omega in (0, 1], got C = {c}, omega = {omega}"
        )));
    }
    guide.validate_for(reference.train.len())?;
    let n = reference.train.len();
    let m = guide.len();
    let slacks = extract_slacks(reference)?;
    let hinge_risk_ref = slacks.iter().sum::<f64>() / n as f64;
    let ls_risk_ref = slacks.iter().map(|s| s * s).sum::<f64>() / n as f64;
    let e_m_star = if m == 0 { 0.0 } else { benchmark_quality(reference, guide)? };
    let e_m_star_ls = e_m_star;
    let norm_sq = rkhs_norm_sq(reference)?;

    let nf = n as f64;
    let mf = m as f64;
    let lambda_n_sq =
        norm_sq + 2.0 * c * nf * omega * hinge_risk_ref + 2.0 * c * mf * (1.0 - omega) * e_m_star;
    let lambda_svm_sq = norm_sq + 2.0 * c * nf * hinge_risk_ref;
    let gamma_ls =
        norm_sq + 2.0 * c * nf * omega * ls_risk_ref + 2.0 * c * mf * (1.0 - omega) * e_m_star_ls;
    let gamma_ls_svm = norm_sq + 2.0 * c * nf * ls_risk_ref;

    let (ratio, helpful) = match variant {
        EdsvmVariant::Cedsvm => (
            diagnostic_ratio(mf, e_m_star, nf, hinge_risk_ref),
            mf * e_m_star < nf * hinge_risk_ref,
        ),
        EdsvmVariant::Lsedsvm => (
            diagnostic_ratio(mf, e_m_star_ls, nf, ls_risk_ref),
            mf * e_m_star_ls < nf * ls_risk_ref,
        ),
    };

    Ok(DiagnosticsReport {
        variant,
        n,
        m,
        c,
        omega,
        e_m_star,
        e_m_star_ls,
        hinge_risk_ref,
        ls_risk_ref,
        lambda_n_sq,
        lambda_svm_sq,
        gamma_ls,
        gamma_ls_svm,
        ratio,
        benchmark_helpful: helpful,
        comparator: "empirical comparator".into(),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::baselines::fit_csvm;
    use crate::kernel::{Dataset, KernelSpec};
    use crate::matrix::Matrix;
    use std::sync::Arc;

    fn fitted_reference() -> TrainedModel {
        let x = Matrix::from_vec(
            8,
            2,
            vec![1.0, 0.2, 0.6, 0.9, 1.4, -0.5, 0.3, 0.3, -0.9, 0.1, -0.4, -0.8, -1.2, 0.5, -0.2, -0.2],
        )
        .unwrap();
        let y = vec![1.0, 1.0, 1.0, 1.0, -1.0, -1.0, -1.0, -1.0];
        let data = Arc::new(Dataset::new(x, y).unwrap());
        fit_csvm(&data, 1.0, &KernelSpec::Rbf { gamma: 0.5 }).unwrap()
    }

    #[test]
    fn perfect_benchmark_has_zero_quality_deficit() {
        let reference = fitted_reference();
        let slacks = extract_slacks(&reference).unwrap();
        let elite: Vec<usize> = (0..4).collect();
        let targets: Vec<f64> = elite.iter().map(|&i| slacks[i]).collect();
        let guide = EliteGuide::new(elite, targets, vec![]).unwrap();
        assert!(benchmark_quality(&reference, &guide).unwrap() < 1e-30);
    }

    #[test]
    fn quality_deficit_arithmetic() {
        // m=2, deviations (0.1, 0.3): (0.01 + 0.09)/2 = 0.05.
        let reference = fitted_reference();
        let slacks = extract_slacks(&reference).unwrap();
        let guide = EliteGuide::new(
            vec![0, 1],
            vec![slacks[0] + 0.1, slacks[1] + 0.3],
            vec![],
        )
        .unwrap();
        assert!((benchmark_quality(&reference, &guide).unwrap() - 0.05).abs() < 1e-12);
    }

    #[test]
    fn empty_elite_is_an_error() {
        let reference = fitted_reference();
        assert!(benchmark_quality(&reference, &EliteGuide::empty()).is_err());
    }

    #[test]
    fn rkhs_norm_of_zero_model_is_zero() {
        let mut reference = fitted_reference();
        reference.alpha = vec![0.0; reference.train.len()];
        assert_eq!(rkhs_norm_sq(&reference).unwrap(), 0.0);
    }

    #[test]
    fn rkhs_norm_matches_two_point_analytic_weight_vector() {
        // Two-point fit with linear kernel has w = (1, 0), |w|^2 = 1.
        let x = Matrix::from_vec(2, 2, vec![1.0, 0.0, -1.0, 0.0]).unwrap();
        let data = Arc::new(Dataset::new(x, vec![1.0, -1.0]).unwrap());
        let m = fit_csvm(&data, 10.0, &KernelSpec::Linear).unwrap();
        assert!((rkhs_norm_sq(&m).unwrap() - 1.0).abs() < 1e-8);
    }

    #[test]
    fn rkhs_norm_matches_double_sum_oracle() {
        let reference = fitted_reference();
        let fast = rkhs_norm_sq(&reference).unwrap();
        // Term-by-term expansion of |sum_j a_j y_j Phi(x_j)|^2.
        let x = reference.train.features();
        let y = reference.train.labels();
        let mut slow = 0.0;
        for i in 0..reference.train.len() {
            for j in 0..reference.train.len() {
                slow += reference.alpha[i]
                    * reference.alpha[j]
                    * y[i]
                    * y[j]
                    * reference.kernel.eval(x.row(i), x.row(j));
            }
        }
        assert!((fast - slow).abs() <= 1e-12 * slow.abs().max(1.0));
    }

    #[test]
    fn radius_identity_and_predicates() {
        let reference = fitted_reference();
        let slacks = extract_slacks(&reference).unwrap();
        let guide = EliteGuide::new(vec![0, 3, 5], vec![slacks[0], slacks[3] + 0.4, 0.2], vec![])
            .unwrap();
        let (c, w) = (1.5, 0.4);
        let rep = radii_report(&reference, &guide, c, w, EdsvmVariant::Cedsvm).unwrap();
        let lhs = rep.lambda_n_sq - rep.lambda_svm_sq;
        let rhs = -2.0 * c * rep.n as f64 * (1.0 - w) * rep.hinge_risk_ref
            + 2.0 * c * rep.m as f64 * (1.0 - w) * rep.e_m_star;
        assert!((lhs - rhs).abs() <= 1e-10 * lhs.abs().max(1.0));
        assert_eq!(rep.benchmark_helpful, rep.ratio < 1.0);
        // LS analogue.
        let ls_lhs = rep.gamma_ls - rep.gamma_ls_svm;
        let ls_rhs = -2.0 * c * rep.n as f64 * (1.0 - w) * rep.ls_risk_ref
            + 2.0 * c * rep.m as f64 * (1.0 - w) * rep.e_m_star_ls;
        assert!((ls_lhs - ls_rhs).abs() <= 1e-10 * ls_lhs.abs().max(1.0));
    }

    #[test]
    fn perfect_benchmark_shrinks_radius_and_omega_one_is_identity() {
        let reference = fitted_reference();
        let slacks = extract_slacks(&reference).unwrap();
        let elite: Vec<usize> = (0..5).collect();
        let targets: Vec<f64> = elite.iter().map(|&i| slacks[i]).collect();
        let guide = EliteGuide::new(elite, targets, vec![]).unwrap();
        let rep = radii_report(&reference, &guide, 2.0, 0.3, EdsvmVariant::Cedsvm).unwrap();
        assert!(rep.e_m_star < 1e-28);
        assert!(rep.lambda_n_sq <= rep.lambda_svm_sq);
        let rep1 = radii_report(&reference, &guide, 2.0, 1.0, EdsvmVariant::Cedsvm).unwrap();
        assert!((rep1.lambda_n_sq - rep1.lambda_svm_sq).abs() < 1e-12);
    }

    #[test]
    fn corrupted_benchmark_flips_the_predicate() {
        let reference = fitted_reference();
        let slacks = extract_slacks(&reference).unwrap();
        let elite: Vec<usize> = (0..reference.train.len()).collect();
        let targets: Vec<f64> = elite.iter().map(|&i| slacks[i] + 1.0).collect();
        let guide = EliteGuide::new(elite, targets, vec![]).unwrap();
        let rep = radii_report(&reference, &guide, 1.0, 0.5, EdsvmVariant::Cedsvm).unwrap();
        assert!(rep.ratio > 1.0, "ratio {} should exceed 1", rep.ratio);
        assert!(rep.lambda_n_sq > rep.lambda_svm_sq);
        assert!(!rep.benchmark_helpful);
    }

    #[test]
    fn infinite_ratio_serializes_as_string() {
        let reference = fitted_reference();
        let mut rep =
            radii_report(&reference, &EliteGuide::empty(), 1.0, 0.5, EdsvmVariant::Cedsvm).unwrap();
        rep.ratio = f64::INFINITY;
        let json = serde_json::to_string(&rep).unwrap();
        assert!(json.contains("\"ratio\":\"inf\""));
        let back: DiagnosticsReport = serde_json::from_str(&json).unwrap();
        assert!(back.ratio.is_infinite());
    }
}
